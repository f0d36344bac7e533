#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rnego/grid.hpp"

namespace rnego {

/// Unsafe set: a collision disc of radius r_coll in the first two (position)
/// dimensions; remaining dimensions are unconstrained.
struct TargetSpec {
    double r_coll = 4.0;  // m

    void validate() const;
    bool operator==(const TargetSpec&) const = default;
};

struct NumericsConfig {
    double cfl_number = 0.5;       // in (0, 1]
    int time_order = 1;            // 1 = forward Euler, 2 = two-stage TVD
    double tau = -1.5;             // horizon, seconds, nonpositive
    std::size_t checkpoint_stride = 0;  // progress callback period in steps, 0 = off
    // Replaces the model's own dissipation coefficients. Used to run several
    // related solves (nested bounds, bank entries) with one shared scheme so
    // their value functions stay pointwise comparable. Must dominate the
    // model's requirement.
    std::optional<std::vector<double>> alpha_override;

    void validate(std::size_t ndim) const;
    bool operator==(const NumericsConfig&) const = default;
};

/// Integration blew up (non-finite node value).
class SolveError : public std::runtime_error {
  public:
    SolveError(const std::string& msg, std::size_t step, std::size_t node)
        : std::runtime_error(msg), step_(step), node_(node) {}

    std::size_t step() const { return step_; }
    std::size_t node() const { return node_; }

  private:
    std::size_t step_;
    std::size_t node_;
};

/// Terminal condition l(s) = sqrt(x^2 + y^2) - r_coll over the grid.
ValueFunction initial_level_set(const Grid& grid, const TargetSpec& target);

/// Strict sub-zero membership: state is inside the tube iff V < 0.
bool membership(const ValueFunction& vf, std::span<const double> state,
                OutOfBounds policy = OutOfBounds::error);

struct SolveOutput {
    ValueFunction vf;                     // value function at the full horizon
    std::vector<ValueFunction> captures;  // snapshots at requested intermediate taus
    std::size_t steps = 0;
};

using ProgressFn = std::function<void(std::size_t step, double sigma)>;

namespace detail {

/// One global Lax-Friedrichs step of size dt, backward-time form
///   v_out = v_in + dt * (H(mean gradient) + sum_d alpha_d (D+_d - D-_d) / 2).
/// Non-periodic boundaries repeat the interior one-sided slope; periodic
/// dimensions wrap. Model contract: hamiltonian(x, idx, p) and alpha(grid).
template <class Model>
void lf_sweep(const Model& model, const Grid& grid, const double* alpha, double dt,
              const std::vector<double>& vin, std::vector<double>& vout) {
    const std::size_t n = grid.ndim();
    const std::size_t total = grid.size();

    std::size_t idx[8] = {};
    double x[8];
    double pbar[8];
    double invh[8];
    std::size_t cnt[8], str[8], wrap_off[8];
    bool per[8];
    const double* axis[8];
    for (std::size_t d = 0; d < n; ++d) {
        invh[d] = 1.0 / grid.spacing(d);
        cnt[d] = grid.count(d);
        str[d] = grid.stride(d);
        per[d] = grid.periodic(d);
        wrap_off[d] = (cnt[d] - 1) * str[d];
        axis[d] = grid.axis(d).data();
        x[d] = axis[d][0];
    }

    for (std::size_t flat = 0; flat < total; ++flat) {
        const double v0 = vin[flat];
        double diss = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
            const std::size_t i = idx[d];
            bool have_m = true, have_p = true;
            double vm = 0.0, vp = 0.0;
            if (i > 0) {
                vm = vin[flat - str[d]];
            } else if (per[d]) {
                vm = vin[flat + wrap_off[d]];
            } else {
                have_m = false;
            }
            if (i + 1 < cnt[d]) {
                vp = vin[flat + str[d]];
            } else if (per[d]) {
                vp = vin[flat - wrap_off[d]];
            } else {
                have_p = false;
            }
            double a = have_m ? (v0 - vm) * invh[d] : 0.0;
            double b = have_p ? (vp - v0) * invh[d] : 0.0;
            if (!have_m) a = b;
            if (!have_p) b = a;
            pbar[d] = 0.5 * (a + b);
            diss += alpha[d] * (b - a);
        }
        vout[flat] = v0 + dt * (model.hamiltonian(x, idx, pbar) + 0.5 * diss);

        for (std::size_t d = n; d-- > 0;) {
            if (++idx[d] < cnt[d]) {
                x[d] = axis[d][idx[d]];
                break;
            }
            idx[d] = 0;
            x[d] = axis[d][0];
        }
    }
}

}  // namespace detail

/// Backward reachable-tube solve: evolves the terminal level set over the
/// horizon |tau| with per-step freezing v <- min(v_evolved, v_previous), so
/// values never rise as the horizon grows and stay below the terminal
/// condition. Time step follows the CFL bound cfl / sum_d(alpha_d / h_d),
/// clipped to land exactly on capture times and the final horizon.
template <class Model>
SolveOutput solve_brt(const Model& model, const Grid& grid, std::vector<double> terminal,
                      const NumericsConfig& numerics, std::vector<double> capture_taus = {},
                      const ProgressFn& progress = nullptr) {
    numerics.validate(grid.ndim());
    if (terminal.size() != grid.size()) {
        throw std::invalid_argument("solve_brt: terminal data does not match grid");
    }

    std::vector<double> alpha;
    {
        auto own = model.alpha(grid);
        alpha.assign(own.begin(), own.end());
    }
    if (numerics.alpha_override) {
        const auto& ov = *numerics.alpha_override;
        if (ov.size() != grid.ndim()) {
            throw std::invalid_argument("solve_brt: dissipation override dimension mismatch");
        }
        for (std::size_t d = 0; d < ov.size(); ++d) {
            if (ov[d] + 1e-9 < alpha[d]) {
                throw std::invalid_argument(
                    "solve_brt: dissipation override below model requirement in dim " +
                    std::to_string(d));
            }
        }
        alpha = ov;
    }

    double rate = 0.0;
    for (std::size_t d = 0; d < grid.ndim(); ++d) {
        rate += alpha[d] / grid.spacing(d);
    }

    const double horizon = -numerics.tau;
    std::vector<double> sigmas;
    for (double t : capture_taus) {
        if (t > 1e-12 || -t > horizon + 1e-9) {
            throw std::invalid_argument("solve_brt: capture tau outside solve horizon");
        }
        sigmas.push_back(std::clamp(-t, 0.0, horizon));
    }
    std::sort(sigmas.begin(), sigmas.end());
    sigmas.erase(std::unique(sigmas.begin(), sigmas.end(),
                             [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
                 sigmas.end());

    std::vector<double> v = std::move(terminal);
    std::vector<ValueFunction> captures;
    std::size_t next_cap = 0;
    while (next_cap < sigmas.size() && sigmas[next_cap] <= 1e-12) {
        captures.emplace_back(grid, 0.0, v);
        ++next_cap;
    }

    std::vector<double> v1(v.size());
    std::vector<double> v2;
    if (numerics.time_order == 2) {
        v2.resize(v.size());
    }

    double sigma = 0.0;
    std::size_t step = 0;
    while (sigma < horizon) {
        double stop = horizon;
        if (next_cap < sigmas.size() && sigmas[next_cap] < stop) {
            stop = sigmas[next_cap];
        }
        double dt = (rate > 0.0) ? numerics.cfl_number / rate : stop - sigma;
        bool landed = false;
        if (sigma + dt >= stop - 1e-12 * std::max(1.0, stop)) {
            dt = stop - sigma;
            landed = true;
        }

        detail::lf_sweep(model, grid, alpha.data(), dt, v, v1);
        if (numerics.time_order == 2) {
            detail::lf_sweep(model, grid, alpha.data(), dt, v1, v2);
            for (std::size_t i = 0; i < v.size(); ++i) {
                v1[i] = 0.5 * (v[i] + v2[i]);
            }
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double nv = std::min(v1[i], v[i]);
            if (!std::isfinite(nv)) {
                throw SolveError("solve_brt: non-finite value during integration", step, i);
            }
            v[i] = nv;
        }
        ++step;
        sigma = landed ? stop : sigma + dt;

        if (landed && next_cap < sigmas.size() && stop == sigmas[next_cap]) {
            captures.emplace_back(grid, sigmas[next_cap] == 0.0 ? 0.0 : -sigmas[next_cap], v);
            ++next_cap;
        }
        if (progress && numerics.checkpoint_stride != 0 &&
            step % numerics.checkpoint_stride == 0) {
            progress(step, sigma);
        }
    }

    return SolveOutput{ValueFunction(grid, numerics.tau, std::move(v)), std::move(captures),
                       step};
}

/// Convenience entry point for the collision-disc target.
template <class Model>
SolveOutput solve_brt(const Model& model, const Grid& grid, const TargetSpec& target,
                      const NumericsConfig& numerics, std::vector<double> capture_taus = {},
                      const ProgressFn& progress = nullptr) {
    auto l = initial_level_set(grid, target);
    return solve_brt(model, grid, std::move(l.values), numerics, std::move(capture_taus),
                     progress);
}

}  // namespace rnego
