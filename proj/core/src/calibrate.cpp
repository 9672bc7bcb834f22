#include "tridoa/calibrate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tridoa {

namespace {

double fd_step(double xi) { return std::max(1e-7, 1e-7 * std::abs(xi)); }

Eigen::VectorXd eval(const ResidualFn& fn, const std::vector<double>& x) {
    std::vector<double> r = fn(x);
    Eigen::VectorXd v(static_cast<Eigen::Index>(r.size()));
    for (size_t i = 0; i < r.size(); ++i) v[static_cast<Eigen::Index>(i)] = r[i];
    return v;
}

}  // namespace

std::vector<std::vector<double>> numeric_jacobian(const ResidualFn& fn,
                                                  const std::vector<double>& x, FdScheme scheme) {
    std::vector<double> xp = x;
    std::vector<double> base;
    if (scheme == FdScheme::kForward) base = fn(x);

    std::vector<std::vector<double>> cols(x.size());
    size_t rows = 0;
    for (size_t c = 0; c < x.size(); ++c) {
        double h = fd_step(x[c]);
        if (scheme == FdScheme::kCentral) {
            xp[c] = x[c] + h;
            std::vector<double> plus = fn(xp);
            xp[c] = x[c] - h;
            std::vector<double> minus = fn(xp);
            xp[c] = x[c];
            cols[c].resize(plus.size());
            for (size_t r = 0; r < plus.size(); ++r) cols[c][r] = (plus[r] - minus[r]) / (2.0 * h);
        } else {
            xp[c] = x[c] + h;
            std::vector<double> plus = fn(xp);
            xp[c] = x[c];
            cols[c].resize(plus.size());
            for (size_t r = 0; r < plus.size(); ++r) cols[c][r] = (plus[r] - base[r]) / h;
        }
        rows = cols[c].size();
    }
    std::vector<std::vector<double>> jac(rows, std::vector<double>(x.size()));
    for (size_t r = 0; r < rows; ++r)
        for (size_t c = 0; c < x.size(); ++c) jac[r][c] = cols[c][r];
    return jac;
}

LmResult lm_minimize(const ResidualFn& residual_fn, std::vector<double> x0,
                     const LmSettings& settings) {
    if (x0.empty()) throw std::invalid_argument("lm_minimize: empty parameter vector");
    if (!(settings.scale > 1.0)) throw std::invalid_argument("lm_minimize: scale must be > 1");

    const Eigen::Index dim = static_cast<Eigen::Index>(x0.size());
    LmResult out;
    out.x = x0;

    Eigen::VectorXd residual = eval(residual_fn, out.x);
    if (!residual.allFinite())
        throw std::invalid_argument("lm_minimize: residual not finite at x0");
    double cost = residual.squaredNorm();
    double lambda = settings.lambda0;
    out.accepted_costs.push_back(cost);

    bool have_jacobian = false;
    Eigen::MatrixXd jac;
    Eigen::MatrixXd jtj;
    Eigen::VectorXd jtr;

    auto finish = [&] {
        size_t m = static_cast<size_t>(residual.size());
        out.rms = m > 0 ? std::sqrt(cost / static_cast<double>(m)) : 0.0;
        return out;
    };

    while (out.iterations < settings.max_iter) {
        ++out.iterations;
        if (!have_jacobian) {
            auto rows = numeric_jacobian(residual_fn, out.x, FdScheme::kCentral);
            jac.resize(static_cast<Eigen::Index>(rows.size()), dim);
            for (size_t r = 0; r < rows.size(); ++r)
                for (Eigen::Index c = 0; c < dim; ++c)
                    jac(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<size_t>(c)];
            jtj = jac.transpose() * jac;
            jtr = jac.transpose() * residual;
            have_jacobian = true;
        }

        Eigen::VectorXd step;
        bool solvable = jtj.allFinite() && jtr.allFinite();
        if (solvable) {
            Eigen::MatrixXd damped = jtj;
            for (Eigen::Index i = 0; i < dim; ++i) {
                double d = jtj(i, i);
                damped(i, i) = d + lambda * (d > 0.0 ? d : 1.0);
            }
            Eigen::LDLT<Eigen::MatrixXd> solver(damped);
            solvable = solver.info() == Eigen::Success;
            if (solvable) {
                step = solver.solve(-jtr);
                solvable = step.allFinite();
            }
        }
        if (!solvable) {
            lambda *= settings.scale;
            if (lambda >= 1e12) return finish();  // singular normal equations, not converged
            continue;
        }

        std::vector<double> candidate = out.x;
        for (Eigen::Index i = 0; i < dim; ++i) candidate[static_cast<size_t>(i)] += step[i];
        Eigen::VectorXd cand_res = eval(residual_fn, candidate);
        double cand_cost = cand_res.allFinite() ? cand_res.squaredNorm()
                                                : std::numeric_limits<double>::infinity();

        if (cand_cost < cost) {
            double decrease = cost - cand_cost;
            out.x = std::move(candidate);
            residual = std::move(cand_res);
            cost = cand_cost;
            out.accepted_costs.push_back(cost);
            lambda /= settings.scale;
            have_jacobian = false;
            if (step.norm() < settings.step_tol || decrease <= settings.residual_tol * cost ||
                cost == 0.0) {
                out.converged = true;
                break;
            }
        } else {
            if (step.norm() < settings.step_tol) {  // no useful direction left
                out.converged = true;
                break;
            }
            lambda *= settings.scale;
            if (lambda >= 1e12) return finish();
        }
    }

    return finish();
}

CalibrationResult calibrate_geometry(const FieldDataset& ds, const ArrayGeometry& init,
                                     FarFieldRadius r, const LmSettings& settings) {
    validate(init);
    if (ds.records.size() < 10)
        throw std::invalid_argument("calibrate_geometry: need at least 10 records");
    double lo = ds.records.front().direction.theta, hi = lo;
    for (const auto& rec : ds.records) {
        lo = std::min(lo, rec.direction.theta);
        hi = std::max(hi, rec.direction.theta);
    }
    if (hi - lo < kPi / 2.0)
        throw std::invalid_argument("calibrate_geometry: records must span >= 90 deg of azimuth");

    ResidualFn residuals = [&ds, r](const std::vector<double>& x) {
        ArrayGeometry g{x[0], x[1], x[2]};
        std::vector<double> out;
        out.reserve(ds.records.size() * 3);
        for (const auto& rec : ds.records) {
            double dist = rec.distance.value_or(r.r);
            Vec3 src = direction_to_point(rec.direction).vec() * dist;
            TdoaTriple q = tdoa_from_geometry(g, src);
            out.push_back(q.r12 - rec.tdoa.r12);
            out.push_back(q.r13 - rec.tdoa.r13);
            out.push_back(q.r23 - rec.tdoa.r23);
        }
        return out;
    };

    LmResult lm = lm_minimize(residuals, {init.b, init.c_x, init.c_y}, settings);
    CalibrationResult result;
    result.geometry = {lm.x[0], lm.x[1], lm.x[2]};
    result.rms_residual = lm.rms;
    result.iterations = lm.iterations;
    result.converged = lm.converged;
    return result;
}

}  // namespace tridoa
