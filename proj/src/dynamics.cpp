#include "rnego/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace rnego {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kHalfPi = kPi / 2.0;
}  // namespace

double wrap_angle(double a) {
    double y = std::fmod(a + kPi, 2.0 * kPi);
    if (y < 0.0) {
        y += 2.0 * kPi;
    }
    return y - kPi;
}

void ControlBounds::validate() const {
    auto check = [](const Interval& iv, const char* name) {
        if (!(iv.min <= iv.max) || !std::isfinite(iv.min) || !std::isfinite(iv.max)) {
            throw std::invalid_argument(std::string("control bounds: bad interval ") + name);
        }
    };
    check(robot_accel, "robot_accel");
    check(robot_steer, "robot_steer");
    check(human_accel, "human_accel");
    check(human_omega, "human_omega");
    if (robot_steer.abs_max() >= kHalfPi) {
        throw std::invalid_argument("control bounds: steering must stay below pi/2");
    }
}

double slip_angle(double delta_f, const VehicleParams& params) {
    if (!(std::abs(delta_f) < kHalfPi)) {
        throw std::invalid_argument("slip_angle: |delta_f| must be below pi/2");
    }
    const double k = params.l_r / (params.l_r + params.l_f);
    return std::atan(k * std::tan(delta_f));
}

std::array<double, 5> relative_dynamics(const RelativeState& state, const RobotControl& u_r,
                                        const HumanControl& u_h, const VehicleParams& params) {
    const double beta = slip_angle(u_r.delta_f, params);
    const double sb = std::sin(beta);
    const double cb = std::cos(beta);
    const double cp = std::cos(state.psi);
    const double sp = std::sin(state.psi);
    const double lr = params.l_r;
    return {
        (state.v_r * state.y / lr) * sb + state.v_h * cp - state.v_r * cb,
        -(state.v_r * state.x / lr) * sb + state.v_h * sp - state.v_r * sb,
        u_h.omega_h - (state.v_r / lr) * sb,
        u_r.a_r,
        u_h.a_h,
    };
}

ExtremalResult extremal_hamiltonian(const RelativeState& state,
                                    const std::array<double, 5>& costate,
                                    const ControlBounds& bounds, const VehicleParams& params) {
    const double p0 = costate[0], p1 = costate[1], p2 = costate[2];
    const double p3 = costate[3], p4 = costate[4];
    const double lr = params.l_r;
    const double vr = state.v_r;

    ExtremalResult r;
    // Drift carried by the human's heading-aligned velocity.
    double h = p0 * state.v_h * std::cos(state.psi) + p1 * state.v_h * std::sin(state.psi);

    // Linear channels: robot acceleration maximizes, human channels minimize.
    if (p3 > 0.0) {
        r.u_star.a_r = bounds.robot_accel.max;
    } else if (p3 < 0.0) {
        r.u_star.a_r = bounds.robot_accel.min;
    } else {
        r.u_star.a_r = bounds.robot_accel.mid();
    }
    h += p3 * r.u_star.a_r;

    if (p4 > 0.0) {
        r.d_star.a_h = bounds.human_accel.min;
    } else if (p4 < 0.0) {
        r.d_star.a_h = bounds.human_accel.max;
    } else {
        r.d_star.a_h = bounds.human_accel.mid();
    }
    h += p4 * r.d_star.a_h;

    if (p2 > 0.0) {
        r.d_star.omega_h = bounds.human_omega.min;
    } else if (p2 < 0.0) {
        r.d_star.omega_h = bounds.human_omega.max;
    } else {
        r.d_star.omega_h = bounds.human_omega.mid();
    }
    h += p2 * r.d_star.omega_h;

    // Steering channel: maximize C_c cos(beta) + C_s sin(beta) over the slip
    // interval. On (-pi/2, pi/2) the interior stationary point exists iff
    // C_c > 0, at tan(beta) = C_s / C_c, with value sqrt(C_c^2 + C_s^2).
    const double cc = -p0 * vr;
    const double cs = p0 * (vr * state.y / lr) - p1 * (vr * state.x / lr + vr) - p2 * (vr / lr);
    const double beta_lo = slip_angle(bounds.robot_steer.min, params);
    const double beta_hi = slip_angle(bounds.robot_steer.max, params);

    if (cc == 0.0 && cs == 0.0) {
        r.u_star.delta_f = bounds.robot_steer.mid();
    } else {
        double best = cc * std::cos(beta_lo) + cs * std::sin(beta_lo);
        double best_delta = bounds.robot_steer.min;
        const double at_hi = cc * std::cos(beta_hi) + cs * std::sin(beta_hi);
        if (at_hi > best) {
            best = at_hi;
            best_delta = bounds.robot_steer.max;
        }
        if (cc > 0.0) {
            const double t = cs / cc;
            if (t >= std::tan(beta_lo) && t <= std::tan(beta_hi)) {
                const double interior = std::sqrt(cc * cc + cs * cs);
                if (interior > best) {
                    best = interior;
                    const double k = params.l_r / (params.l_r + params.l_f);
                    best_delta = std::atan(t / k);
                }
            }
        }
        r.u_star.delta_f = best_delta;
        h += best;
    }

    r.hamiltonian = h;
    return r;
}

RelativeDynamicsModel::RelativeDynamicsModel(VehicleParams params, ControlBounds bounds)
    : params_(params), bounds_(bounds) {
    bounds_.validate();
    beta_lo_ = slip_angle(bounds_.robot_steer.min, params_);
    beta_hi_ = slip_angle(bounds_.robot_steer.max, params_);
    cos_blo_ = std::cos(beta_lo_);
    sin_blo_ = std::sin(beta_lo_);
    cos_bhi_ = std::cos(beta_hi_);
    sin_bhi_ = std::sin(beta_hi_);
    tan_blo_ = std::tan(beta_lo_);
    tan_bhi_ = std::tan(beta_hi_);
}

void RelativeDynamicsModel::prepare(const Grid& grid) {
    if (grid.ndim() != kDim) {
        throw std::invalid_argument("relative dynamics model needs a 5D grid");
    }
    const auto& axis = grid.axis(kHeadingDim);
    cos_psi_.resize(axis.size());
    sin_psi_.resize(axis.size());
    for (std::size_t i = 0; i < axis.size(); ++i) {
        cos_psi_[i] = std::cos(axis[i]);
        sin_psi_[i] = std::sin(axis[i]);
    }
}

double RelativeDynamicsModel::hamiltonian(const double* x, const std::size_t* idx,
                                          const double* p) const {
    const double cp = cos_psi_[idx[kHeadingDim]];
    const double sp = sin_psi_[idx[kHeadingDim]];
    const double vr = x[3];
    const double vh = x[4];
    const double lr = params_.l_r;

    double h = p[0] * vh * cp + p[1] * vh * sp;

    h += p[3] * (p[3] > 0.0 ? bounds_.robot_accel.max : bounds_.robot_accel.min);
    h += p[4] * (p[4] > 0.0 ? bounds_.human_accel.min : bounds_.human_accel.max);
    h += p[2] * (p[2] > 0.0 ? bounds_.human_omega.min : bounds_.human_omega.max);

    const double cc = -p[0] * vr;
    const double cs = p[0] * (vr * x[1] / lr) - p[1] * (vr * x[0] / lr + vr) - p[2] * (vr / lr);
    double best = cc * cos_blo_ + cs * sin_blo_;
    const double at_hi = cc * cos_bhi_ + cs * sin_bhi_;
    if (at_hi > best) {
        best = at_hi;
    }
    if (cc > 0.0) {
        const double t = cs / cc;
        if (t >= tan_blo_ && t <= tan_bhi_) {
            const double interior = std::sqrt(cc * cc + cs * cs);
            if (interior > best) {
                best = interior;
            }
        }
    }
    return h + best;
}

std::array<double, 5> RelativeDynamicsModel::alpha(const Grid& grid) const {
    const double x_max = std::max(std::abs(grid.lower(0)), std::abs(grid.upper(0)));
    const double y_max = std::max(std::abs(grid.lower(1)), std::abs(grid.upper(1)));
    const double vr_max = std::max(std::abs(grid.lower(3)), std::abs(grid.upper(3)));
    const double vh_max = std::max(std::abs(grid.lower(4)), std::abs(grid.upper(4)));
    const double sb_max = std::max(std::abs(sin_blo_), std::abs(sin_bhi_));
    const double lr = params_.l_r;
    return {
        (vr_max * y_max / lr) * sb_max + vh_max + vr_max,
        (vr_max * x_max / lr) * sb_max + vh_max + vr_max * sb_max,
        bounds_.human_omega.abs_max() + (vr_max / lr) * sb_max,
        bounds_.robot_accel.abs_max(),
        bounds_.human_accel.abs_max(),
    };
}

}  // namespace rnego
