#pragma once

#include <vector>

#include "evflow/geometry.hpp"
#include "evflow/types.hpp"

namespace evflow {

/// One normal-flow measurement feeding the egomotion solver.
struct NormalFlowObs {
    Vec2 x = Vec2::Zero();   ///< normalized pixel location
    Vec2 g = Vec2::Zero();   ///< unit normal-flow direction
    double mag = 0.0;        ///< ||n_hat||, normalized px/s
};

/**
 * Linear classification problem of the depth-positivity constraint.
 * q/r hold the p usable observations (rows g^T A_x and derotated magnitudes);
 * q_doubled/labels hold the origin-symmetric doubled dataset
 * (Q, sign(R)) u (-Q, -sign(R)) the solver trains on.
 */
struct EgoProblem {
    Eigen::MatrixXd q;          ///< p x 3
    Eigen::VectorXd r;          ///< p derotated magnitudes n_x
    Eigen::MatrixXd q_doubled;  ///< 2p x 3
    Eigen::VectorXd labels;     ///< 2p, +/-1
};

struct TranslationEstimate {
    Vec3 v = Vec3::Zero();          ///< unit translation direction
    double inlier_fraction = 0.0;   ///< fraction of observations with rho > 0
};

/// Derotated normal-flow magnitude n_x = ||n_hat|| - g^T (B_x omega0).
double derotate(const NormalFlowObs& obs, const Vec3& omega0);

/// Assemble the classification problem. Observations with |n_x| <= 1e-8 are
/// dropped (the sign of ~0 is noise). Throws InsufficientData (< 3 usable
/// rows) or DegenerateGeometry (rank(Q) < 2).
EgoProblem build_problem(const std::vector<NormalFlowObs>& observations, const Vec3& omega0);

/**
 * Maximum-margin translation direction: minimizes
 * (lambda/2)||w||^2 + (1/m) sum max(0, 1 - r_i q_i.w) with no intercept.
 * Solved by deterministic dual coordinate descent (fixed sweep order, at
 * most 5000 passes, stops when the largest update falls below 1e-12).
 * Throws ZeroSolution when the minimizer collapses to the origin.
 */
TranslationEstimate solve_svm(const EgoProblem& prob, double lambda = 1e-4);

/// Negative-depth baseline: minimize sum max(0, -rho_x(V)) over the unit
/// sphere by projected gradient descent from 26 deterministic directions,
/// keeping the best. Throws InsufficientData.
TranslationEstimate solve_negative_depth(const std::vector<NormalFlowObs>& observations,
                                         const Vec3& omega0);

} // namespace evflow
