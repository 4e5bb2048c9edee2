#include "evflow/metrics.hpp"

#include <cmath>

#include "evflow/losses.hpp"

namespace evflow {

std::optional<double> pee(const Vec2& u, const Vec2& n_hat) {
    const double nn = n_hat.norm();
    if (nn <= kDegenerateNorm) return std::nullopt;
    return std::abs(u.dot(n_hat) / nn - nn);
}

double pos_pct(const std::vector<std::pair<Vec2, Vec2>>& pairs) {
    if (pairs.empty()) throw EmptyInput("pos_pct over an empty pair list");
    std::size_t pos = 0;
    for (const auto& [u, n] : pairs)
        if (u.dot(n) > 0.0) ++pos;
    return 100.0 * static_cast<double>(pos) / static_cast<double>(pairs.size());
}

double rms_velocity(const std::vector<Vec3>& estimates, const std::vector<Vec3>& gt) {
    if (estimates.size() != gt.size())
        throw LengthMismatch("estimate/gt sequences differ in length");
    if (estimates.empty()) throw EmptyInput("rms_velocity over empty sequences");
    double acc = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const Vec3 scaled = estimates[i] * gt[i].norm();
        acc += (scaled - gt[i]).squaredNorm();
    }
    return std::sqrt(acc / static_cast<double>(estimates.size()));
}

FlowEvalReport evaluate_flow(const std::vector<Vec2>& gt_u, const std::vector<Vec2>& pred_n) {
    if (gt_u.size() != pred_n.size())
        throw LengthMismatch("flow/prediction sequences differ in length");
    FlowEvalReport rep;
    double pee_acc = 0.0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < gt_u.size(); ++i) {
        const auto e = pee(gt_u[i], pred_n[i]);
        if (!e) {
            ++rep.n_masked;
            continue;
        }
        pee_acc += *e;
        if (gt_u[i].dot(pred_n[i]) > 0.0) ++pos;
        ++rep.n_evaluated;
    }
    if (rep.n_evaluated > 0) {
        rep.pee_mean = pee_acc / static_cast<double>(rep.n_evaluated);
        rep.pos_pct = 100.0 * static_cast<double>(pos) / static_cast<double>(rep.n_evaluated);
    }
    return rep;
}

} // namespace evflow
