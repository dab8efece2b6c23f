#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "navisense/geometry.hpp"
#include "navisense/perception.hpp"
#include "navisense/rng.hpp"
#include "navisense/session.hpp"
#include "navisense/sim.hpp"

namespace navisense::testkit {

// Random geometry -----------------------------------------------------------

Pose random_pose(Rng& rng, double max_translation = 5.0);
/// A world point that projects inside the image at depth in [0.2, 8] m.
Vec3 random_in_frustum_point(Rng& rng, const Pose& pose, const perception::CameraIntrinsics& intr);
/// Random axis-aligned boxes in front of an identity camera.
sim::Scene random_box_scene(Rng& rng, int objects);

// Independent references ----------------------------------------------------

/// Independent transition table for the session machine.
session::StepResult reference_step(const session::SessionState& state,
                                   const session::SessionEvent& event);

/// A random event drawn from the full alphabet (including payload variants).
session::SessionEvent random_event(Rng& rng);

/// Brute-force depth: each object rendered on its own, then the per-pixel
/// minimum. NaN marks a pixel with no hit.
std::vector<float> brute_force_depth(const sim::Scene& scene, const Pose& pose,
                                     const perception::CameraIntrinsics& intr, float max_range);

/// Two-sided paired-t p by adaptive Simpson quadrature of the t density.
double t_quadrature_p(double t, double df);

/// Two-sided Wilcoxon p from all 2^n sign assignments (zeros dropped).
double wilcoxon_enumeration_p(std::span<const double> a, std::span<const double> b);

/// Friedman p from all (k!)^n within-row permutations.
double friedman_enumeration_p(const std::vector<std::vector<double>>& grid);

/// Hand-expanded repeated-measures F.
double anova_hand_f(const std::vector<std::vector<double>>& grid);

}  // namespace navisense::testkit
