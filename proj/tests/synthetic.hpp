#pragma once

// Deterministic synthetic scenes and corpora shared by the unit and
// acceptance suites.

#include <cstdint>

#include "t4d/geometry.hpp"
#include "t4d/rng.hpp"
#include "t4d/types.hpp"

namespace t4dtest {

t4d::CameraIntrinsics default_intrinsics(int width, int height);

// Smooth strictly-positive depth field around `base`.
t4d::DepthMap wavy_depth(int height, int width, double base = 2.0, double amplitude = 0.4);

t4d::ColorGrid random_colors(int height, int width, uint64_t seed);

// Static scene: every frame repeats the anchored frame-0 grid, depths from dm.
t4d::TrackSet clean_static_tracks(int frames, const t4d::DepthMap& dm);

// Scene with smooth per-pixel 3D drift, reprojected into consistent
// (u_t, v_t, d_t) records. Motion amplitude stays below ~0.1 m.
t4d::TrackSet moving_tracks(int frames, const t4d::DepthMap& dm,
                            const t4d::CameraIntrinsics& k, uint64_t seed);

// Corpus corruptions; each variant trips exactly one quality filter.
t4d::TrackSet corrupt_with_sentinels(t4d::TrackSet tracks, double fraction, uint64_t seed);
t4d::TrackSet corrupt_with_dispersion(int frames, int height, int width, uint64_t seed);
// Moves `fraction` of the frame-0 points to a depth just below the render
// near plane, which a scaled render reveals.
t4d::TrackSet corrupt_with_near_plane(t4d::TrackSet tracks, double fraction, float near_depth,
                                      uint64_t seed);

// Grid-anchored cloud with per-frame drift, built directly (no TrackSet).
t4d::PointCloudSequence drifting_scene(int frames, int height, int width,
                                       const t4d::CameraIntrinsics& k, uint64_t seed);

}  // namespace t4dtest
