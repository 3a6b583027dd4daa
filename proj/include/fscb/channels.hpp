// Discrete memoryless channels: cost-constrained capacity, the
// sphere-packing exponent in both its Gallager-dual and primal forms, and
// the causal-state capacity via Shannon strategies.
#pragma once

#include "fscb/core.hpp"

#include <optional>

namespace fscb {

class Dmc {
public:
    explicit Dmc(Mat transition);

    static Dmc bsc(double crossover);
    static Dmc noiseless(int n);

    int input_size() const { return static_cast<int>(m_.rows()); }
    int output_size() const { return static_cast<int>(m_.cols()); }
    double prob(int y, int x) const { return m_(x, y); }
    const Mat& matrix() const { return m_; }

    // l-fold memoryless extension over block superalphabets.
    Dmc block_extension(int block_len) const;

private:
    Mat m_;  // rows = inputs, columns = outputs
};

struct CostFunction {
    Vec phi;        // per-input cost
    double budget;  // Gamma

    CostFunction(Vec phi_, double budget_);
};

struct CapacityResult {
    double value_bits = 0.0;
    Vec input_pmf;
    int iterations = 0;
};

struct CapacityOptions {
    double tol = 1e-11;       // gap between Arimoto upper/lower capacity bounds
    int max_iterations = 100000;
    int multiplier_steps = 200;  // bisection steps for the budget multiplier
};

// C(Gamma) = max I(X;Y) over input PMFs meeting the cost budget (if any).
CapacityResult capacity(const Dmc& ch, const std::optional<CostFunction>& cost = {},
                        const CapacityOptions& opts = {});

struct SpOptions {
    double rho_cap = 64.0;
    double tol = 1e-10;
};

struct SpDiagnostics {
    double rho_at_max = 0.0;
    bool increasing_at_cap = false;  // objective still rising at rho_cap => +inf declared
};

// E_sp(R) via the Gallager dual sup_{rho >= 0} [max_Q E0(rho,Q) - rho R].
// Returns +inf (with diagnostics) when the objective is still increasing at
// rho_cap, i.e. the rate is below the divergence threshold of the dual.
double sphere_packing_exponent(const Dmc& ch, double rate_bits, const SpOptions& opts = {},
                               SpDiagnostics* diag = nullptr);

// max_Q E0(rho, Q) in bits, by alternating minimization on the simplex.
double gallager_e0_max(const Dmc& ch, double rho, Vec* argmax_input = nullptr);

// Primal form for a fixed input PMF:
//   inf { D(Q_{Y|X} || P_{Y|X} | input) : I_Q(X;Y) <= R }.
// Solved as a convex program by a multiplier sweep; `resolution` controls the
// sweep refinement. Serves as the independent oracle for the dual.
double sphere_packing_primal(const Dmc& ch, double rate_bits, const Vec& input_pmf,
                             int resolution = 200);

struct StateChannel {
    FinitePmf state_pmf;          // P_S
    std::vector<Mat> per_state;   // per_state[s](x, y) = P(y | x, s)

    StateChannel(FinitePmf state_pmf_, std::vector<Mat> per_state_);

    int state_size() const { return state_pmf.size(); }
    int input_size() const { return static_cast<int>(per_state.front().rows()); }
    int output_size() const { return static_cast<int>(per_state.front().cols()); }

    // State-averaged channel sum_s P_S(s) P(y|x,s).
    Dmc averaged() const;
};

struct ShannonStrategyResult {
    double value_bits = 0.0;
    Vec strategy_pmf;   // over the |X|^|S| strategies t : S -> X
    Dmc derived;        // P(y | t)
    Vec derived_cost;   // phi'(t), empty when no cost given
};

// Capacity with causal state information at the encoder, reduced to an
// ordinary DMC over Shannon strategies. Strategy t is encoded base-|X| with
// the digit for state 0 most significant.
ShannonStrategyResult causal_state_capacity(const StateChannel& sch,
                                            const std::optional<CostFunction>& cost = {},
                                            long strategy_cap = 65536,
                                            const CapacityOptions& opts = {});

}  // namespace fscb
