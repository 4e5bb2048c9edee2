#include "evflow/egomotion.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

namespace evflow {

namespace {

constexpr double kMagnitudeFloor = 1e-8;

double inlier_fraction(const EgoProblem& prob, const Vec3& v) {
    if (prob.q.rows() == 0) return 0.0;
    std::size_t pos = 0;
    for (Eigen::Index i = 0; i < prob.q.rows(); ++i) {
        const double rho = prob.r(i) * prob.q.row(i).dot(v);
        if (rho > 0.0) ++pos;
    }
    return static_cast<double>(pos) / static_cast<double>(prob.q.rows());
}

} // namespace

double derotate(const NormalFlowObs& obs, const Vec3& omega0) {
    return obs.mag - obs.g.dot(matrix_B(obs.x) * omega0);
}

EgoProblem build_problem(const std::vector<NormalFlowObs>& observations, const Vec3& omega0) {
    std::vector<Eigen::RowVector3d> rows;
    std::vector<double> mags;
    rows.reserve(observations.size());
    mags.reserve(observations.size());
    for (const auto& obs : observations) {
        const double n = derotate(obs, omega0);
        if (std::abs(n) <= kMagnitudeFloor) continue;
        rows.push_back(obs.g.transpose() * matrix_A(obs.x));
        mags.push_back(n);
    }
    const auto p = static_cast<Eigen::Index>(rows.size());
    if (p < 3)
        throw InsufficientData("only " + std::to_string(rows.size()) +
                               " usable observations, need at least 3");

    EgoProblem prob;
    prob.q.resize(p, 3);
    prob.r.resize(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        prob.q.row(i) = rows[static_cast<std::size_t>(i)];
        prob.r(i) = mags[static_cast<std::size_t>(i)];
    }

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(prob.q);
    const auto& sv = svd.singularValues();
    const double tol = 1e-10 * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;
    if (rank < 2) throw DegenerateGeometry("observation matrix has rank < 2");

    prob.q_doubled.resize(2 * p, 3);
    prob.labels.resize(2 * p);
    prob.q_doubled.topRows(p) = prob.q;
    prob.q_doubled.bottomRows(p) = -prob.q;
    for (Eigen::Index i = 0; i < p; ++i) {
        const double s = prob.r(i) > 0.0 ? 1.0 : -1.0;
        prob.labels(i) = s;
        prob.labels(p + i) = -s;
    }
    return prob;
}

TranslationEstimate solve_svm(const EgoProblem& prob, double lambda) {
    // Minimizes (lambda/2)||w||^2 + (1/m) sum hinge(r_i q_i.w), no intercept,
    // by dual coordinate descent with a fixed sweep order. The objective is
    // strongly convex, so the minimizer is unique and the solver is exactly
    // deterministic.
    const Eigen::Index m = prob.q_doubled.rows();
    const double c = 1.0 / (lambda * static_cast<double>(m));

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd qnorm2(m);
    for (Eigen::Index i = 0; i < m; ++i) qnorm2(i) = prob.q_doubled.row(i).squaredNorm();

    Vec3 w = Vec3::Zero();
    constexpr int kMaxPasses = 5000;
    for (int pass = 0; pass < kMaxPasses; ++pass) {
        double max_step = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (qnorm2(i) <= 0.0) continue;
            const double g = prob.labels(i) * prob.q_doubled.row(i).dot(w) - 1.0;
            const double next = std::clamp(alpha(i) - g / qnorm2(i), 0.0, c);
            const double delta = next - alpha(i);
            if (delta == 0.0) continue;
            w += delta * prob.labels(i) * prob.q_doubled.row(i).transpose();
            alpha(i) = next;
            max_step = std::max(max_step, std::abs(delta) * std::sqrt(qnorm2(i)));
        }
        if (max_step < 1e-12 * (1.0 + w.norm())) break;
    }
    if (w.norm() < 1e-12)
        throw ZeroSolution("svm weight vector collapsed to the origin");

    TranslationEstimate est;
    est.v = w.normalized();
    est.inlier_fraction = inlier_fraction(prob, est.v);
    return est;
}

TranslationEstimate solve_negative_depth(const std::vector<NormalFlowObs>& observations,
                                         const Vec3& omega0) {
    const EgoProblem prob = build_problem(observations, omega0);

    const auto loss_of = [&](const Vec3& v) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < prob.q.rows(); ++i) {
            const double rho = prob.r(i) * prob.q.row(i).dot(v);
            if (rho < 0.0) acc -= rho;
        }
        return acc;
    };
    const auto grad_of = [&](const Vec3& v) {
        Vec3 g = Vec3::Zero();
        for (Eigen::Index i = 0; i < prob.q.rows(); ++i) {
            const double rho = prob.r(i) * prob.q.row(i).dot(v);
            if (rho < 0.0) g -= prob.r(i) * prob.q.row(i).transpose();
        }
        return g;
    };

    Vec3 best = Vec3::UnitZ();
    double best_loss = std::numeric_limits<double>::infinity();

    // 26 deterministic starts: all nonzero sign patterns of {-1,0,1}^3.
    for (int sx = -1; sx <= 1; ++sx) {
        for (int sy = -1; sy <= 1; ++sy) {
            for (int sz = -1; sz <= 1; ++sz) {
                if (sx == 0 && sy == 0 && sz == 0) continue;
                Vec3 v = Vec3(sx, sy, sz).normalized();
                double local_loss = loss_of(v);
                if (local_loss < best_loss) {
                    best_loss = local_loss;
                    best = v;
                }
                for (int t = 0; t < 200 && local_loss > 0.0; ++t) {
                    const Vec3 g = grad_of(v);
                    const double gn = g.norm();
                    if (gn < 1e-14) break;
                    const double step = 0.3 / std::sqrt(static_cast<double>(t + 1));
                    v = (v - step * (g / gn)).normalized();
                    local_loss = loss_of(v);
                    if (local_loss < best_loss) {
                        best_loss = local_loss;
                        best = v;
                    }
                }
            }
        }
    }

    TranslationEstimate est;
    est.v = best;
    est.inlier_fraction = inlier_fraction(prob, est.v);
    return est;
}

} // namespace evflow
