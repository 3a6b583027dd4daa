#include "fscb/channels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fscb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453;

void check_row_stochastic(const Mat& m, const char* what) {
    if (m.rows() < 1 || m.cols() < 1) throw std::invalid_argument(std::string(what) + ": empty");
    if ((m.array() < 0.0).any() || (m.array() > 1.0 + 1e-12).any())
        throw std::invalid_argument(std::string(what) + ": entries outside [0,1]");
    for (long x = 0; x < m.rows(); ++x)
        if (std::abs(m.row(x).sum() - 1.0) > 1e-12)
            throw std::invalid_argument(std::string(what) + ": row does not sum to 1");
}

double logsumexp(const std::vector<double>& v) {
    double m = -kInf;
    for (double x : v) m = std::max(m, x);
    if (m == -kInf) return -kInf;
    double s = 0.0;
    for (double x : v)
        if (x != -kInf) s += std::exp(x - m);
    return m + std::log(s);
}

// One Arimoto step for max_p [I(p) - s * E_p phi], everything in nats.
// Returns (lower, upper) bounds on the penalized objective at the current p
// and replaces p by the updated distribution.
struct ArimotoStep {
    double lower;
    double upper;
};

ArimotoStep arimoto_step(const Mat& w, const Vec* phi, double s, Vec& p) {
    const long nx = w.rows(), ny = w.cols();
    Vec q = w.transpose() * p;
    Vec t(nx);
    for (long x = 0; x < nx; ++x) {
        double d = 0.0;
        for (long y = 0; y < ny; ++y) {
            if (w(x, y) <= 0.0) continue;
            // q(y) >= p(x) w(x,y) > 0 whenever p(x) > 0; rows with p(x) = 0
            // can still be scored because q(y) = 0 forces w(x,y) = 0 only
            // for unreachable outputs, which we guard against below.
            if (q(y) <= 0.0) {
                d = kInf;
                break;
            }
            d += w(x, y) * std::log(w(x, y) / q(y));
        }
        t(x) = d - (phi ? s * (*phi)(x) : 0.0);
    }
    double lower = 0.0;
    for (long x = 0; x < nx; ++x)
        if (p(x) > 0.0) lower += p(x) * t(x);
    double upper = t.maxCoeff();

    // Multiplicative update, stabilized around the maximum exponent.
    Vec lp(nx);
    for (long x = 0; x < nx; ++x)
        lp(x) = (p(x) > 0.0 ? std::log(p(x)) : -kInf) + t(x);
    double m = lp.maxCoeff();
    double z = 0.0;
    for (long x = 0; x < nx; ++x) z += (lp(x) == -kInf ? 0.0 : std::exp(lp(x) - m));
    for (long x = 0; x < nx; ++x) p(x) = (lp(x) == -kInf ? 0.0 : std::exp(lp(x) - m) / z);
    return {lower, upper};
}

struct BaResult {
    double mi_bits;
    double mean_cost;
    Vec p;
    int iterations;
};

BaResult ba_penalized(const Mat& w, const Vec* phi, double s_nats, const CapacityOptions& opts) {
    const long nx = w.rows();
    Vec p = Vec::Constant(nx, 1.0 / nx);
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        Vec prev = p;
        ArimotoStep st = arimoto_step(w, phi, s_nats, p);
        if (st.upper - st.lower < opts.tol * kLn2) break;
        if ((p - prev).cwiseAbs().maxCoeff() < 1e-16) break;
    }
    Vec q = w.transpose() * p;
    double mi = 0.0;
    for (long x = 0; x < nx; ++x) {
        if (p(x) <= 0.0) continue;
        for (long y = 0; y < w.cols(); ++y) {
            if (w(x, y) <= 0.0) continue;
            mi += p(x) * w(x, y) * std::log2(w(x, y) / q(y));
        }
    }
    double cost = phi ? p.dot(*phi) : 0.0;
    return {std::max(mi, 0.0), cost, std::move(p), it};
}

}  // namespace

Dmc::Dmc(Mat transition) : m_(std::move(transition)) { check_row_stochastic(m_, "Dmc"); }

Dmc Dmc::bsc(double crossover) {
    if (crossover < 0.0 || crossover > 1.0)
        throw std::invalid_argument("bsc: crossover outside [0,1]");
    Mat m(2, 2);
    m << 1.0 - crossover, crossover, crossover, 1.0 - crossover;
    return Dmc(std::move(m));
}

Dmc Dmc::noiseless(int n) { return Dmc(Mat::Identity(n, n)); }

Dmc Dmc::block_extension(int block_len) const {
    if (block_len < 1) throw std::invalid_argument("block_extension: block_len < 1");
    long si = 1, so = 1;
    for (int k = 0; k < block_len; ++k) {
        si *= input_size();
        so *= output_size();
        if (si > kMaxAlphabetSize || so > kMaxAlphabetSize)
            throw ResourceError("Dmc::block_extension: superalphabet exceeds cap");
    }
    Mat out = Mat::Ones(si, so);
    std::vector<int> xb(block_len), yb(block_len);
    for (long xi = 0; xi < si; ++xi) {
        unpack_block(xi, input_size(), xb);
        for (long yi = 0; yi < so; ++yi) {
            unpack_block(yi, output_size(), yb);
            double v = 1.0;
            for (int k = 0; k < block_len; ++k) v *= m_(xb[k], yb[k]);
            out(xi, yi) = v;
        }
    }
    return Dmc(std::move(out));
}

CostFunction::CostFunction(Vec phi_, double budget_) : phi(std::move(phi_)), budget(budget_) {
    if (!phi.allFinite() || (phi.array() < 0.0).any())
        throw std::invalid_argument("CostFunction: costs must be finite and nonnegative");
    if (budget < phi.minCoeff())
        throw FeasibilityError("CostFunction: budget below the cheapest input");
}

CapacityResult capacity(const Dmc& ch, const std::optional<CostFunction>& cost,
                        const CapacityOptions& opts) {
    const Mat& w = ch.matrix();
    if (!cost) {
        BaResult r = ba_penalized(w, nullptr, 0.0, opts);
        return {r.mi_bits, std::move(r.p), r.iterations};
    }
    if (cost->phi.size() != ch.input_size())
        throw std::invalid_argument("capacity: cost table does not match input alphabet");
    double phimin = cost->phi.minCoeff();
    if (cost->budget < phimin - 1e-12)
        throw FeasibilityError("capacity: budget below the cheapest input");

    if (cost->budget <= phimin + 1e-12) {
        // Boundary budget: only the cheapest inputs are usable at all.
        std::vector<long> keep;
        for (long x = 0; x < w.rows(); ++x)
            if (cost->phi(x) <= cost->budget + 1e-12) keep.push_back(x);
        Mat sub(keep.size(), w.cols());
        for (size_t k = 0; k < keep.size(); ++k) sub.row(k) = w.row(keep[k]);
        BaResult r = ba_penalized(sub, nullptr, 0.0, opts);
        Vec full = Vec::Zero(w.rows());
        for (size_t k = 0; k < keep.size(); ++k) full(keep[k]) = r.p(k);
        return {r.mi_bits, std::move(full), r.iterations};
    }

    BaResult unconstrained = ba_penalized(w, nullptr, 0.0, opts);
    if (unconstrained.p.dot(cost->phi) <= cost->budget + 1e-9)
        return {unconstrained.mi_bits, std::move(unconstrained.p), unconstrained.iterations};

    // Sweep the budget multiplier: mean cost is nonincreasing in s.
    double s_lo = 0.0, s_hi = 1.0;
    BaResult hi = ba_penalized(w, &cost->phi, s_hi, opts);
    int guard = 0;
    while (hi.mean_cost > cost->budget && guard++ < 80) {
        s_hi *= 2.0;
        hi = ba_penalized(w, &cost->phi, s_hi, opts);
    }
    BaResult best = hi;  // feasible side
    for (int k = 0; k < opts.multiplier_steps; ++k) {
        double s = 0.5 * (s_lo + s_hi);
        BaResult r = ba_penalized(w, &cost->phi, s, opts);
        if (r.mean_cost <= cost->budget) {
            s_hi = s;
            best = std::move(r);
        } else {
            s_lo = s;
        }
        if (std::abs(best.mean_cost - cost->budget) < 1e-13) break;
    }
    return {best.mi_bits, std::move(best.p), best.iterations};
}

double gallager_e0_max(const Dmc& ch, double rho, Vec* argmax_input) {
    const Mat& w = ch.matrix();
    const long nx = w.rows(), ny = w.cols();
    if (rho < 0.0) throw std::invalid_argument("gallager_e0_max: rho < 0");
    if (rho == 0.0) {
        if (argmax_input) *argmax_input = Vec::Constant(nx, 1.0 / nx);
        return 0.0;
    }
    const double r = 1.0 / (1.0 + rho);
    Mat lphi(nx, ny);
    for (long x = 0; x < nx; ++x)
        for (long y = 0; y < ny; ++y) lphi(x, y) = w(x, y) > 0.0 ? r * std::log(w(x, y)) : -kInf;

    Vec lq = Vec::Constant(nx, -std::log(static_cast<double>(nx)));
    std::vector<double> buf;
    double lF = kInf;
    const int max_iters = 20000;
    for (int it = 0; it < max_iters; ++it) {
        // l_alpha(y) = log sum_x q(x) phi(x,y)
        Vec lalpha(ny);
        for (long y = 0; y < ny; ++y) {
            buf.clear();
            for (long x = 0; x < nx; ++x)
                if (lphi(x, y) != -kInf) buf.push_back(lq(x) + lphi(x, y));
            lalpha(y) = logsumexp(buf);
        }
        // l_D(x) = log sum_y phi(x,y) alpha(y)^rho
        Vec lD(nx);
        for (long x = 0; x < nx; ++x) {
            buf.clear();
            for (long y = 0; y < ny; ++y)
                if (lphi(x, y) != -kInf && lalpha(y) != -kInf)
                    buf.push_back(lphi(x, y) + rho * lalpha(y));
            lD(x) = logsumexp(buf);
        }
        // F = sum_x q(x) D(x) = sum_y alpha^{1+rho}; decreases monotonically.
        buf.clear();
        for (long x = 0; x < nx; ++x) buf.push_back(lq(x) + lD(x));
        double lF_new = logsumexp(buf);
        bool converged = lF != kInf && lF - lF_new < 1e-15;
        lF = lF_new;

        // Convexity gap: F* >= (1+rho) min_x D_x - rho F.
        double lDmin = lD.minCoeff();
        if (lDmin != -kInf) {
            double f_lb = (1.0 + rho) * std::exp(lDmin) - rho * std::exp(lF);
            if (f_lb > 0.0 && -std::log2(f_lb) - (-lF / kLn2) < 1e-13) converged = true;
        }
        if (converged) break;

        for (long x = 0; x < nx; ++x) lq(x) -= lD(x) / rho;
        buf.assign(lq.data(), lq.data() + nx);
        double z = logsumexp(buf);
        for (long x = 0; x < nx; ++x) lq(x) -= z;
    }
    if (argmax_input) {
        Vec q(nx);
        for (long x = 0; x < nx; ++x) q(x) = std::exp(lq(x));
        q /= q.sum();
        *argmax_input = std::move(q);
    }
    return -lF / kLn2;  // E0 of the final iterate: a certified lower bound
}

double sphere_packing_exponent(const Dmc& ch, double rate_bits, const SpOptions& opts,
                               SpDiagnostics* diag) {
    if (diag) *diag = SpDiagnostics{};
    if (rate_bits < 0.0) {
        if (diag) diag->increasing_at_cap = true;
        return kInf;
    }
    auto g = [&](double rho) { return gallager_e0_max(ch, rho) - rho * rate_bits; };

    const double cap = opts.rho_cap;
    double g_cap = g(cap);
    double g_near = g(cap * 0.995);
    if (g_cap > g_near + 1e-12) {
        // Objective still rising at the cap: declare divergence.
        if (diag) {
            diag->increasing_at_cap = true;
            diag->rho_at_max = cap;
        }
        return kInf;
    }

    // Golden-section maximization of the concave g on [0, cap].
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = 0.0, b = cap;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = g(x1), f2 = g(x2);
    for (int it = 0; it < 120 && (b - a) > 1e-12 * cap; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = g(x1);
        }
    }
    double rho_star = 0.5 * (a + b);
    double val = std::max({g(rho_star), g_cap, 0.0});
    if (diag) diag->rho_at_max = rho_star;
    return val;
}

double sphere_packing_primal(const Dmc& ch, double rate_bits, const Vec& input_pmf,
                             int resolution) {
    const Mat& p = ch.matrix();
    const long nx = p.rows(), ny = p.cols();
    if (input_pmf.size() != nx)
        throw std::invalid_argument("sphere_packing_primal: input pmf size mismatch");
    if (static_cast<long>(nx) * ny > (1L << 20))
        throw ResourceError("sphere_packing_primal: alphabet cap exceeded");
    if (rate_bits < 0.0) return kInf;
    if (channel_mutual_information(input_pmf, p) <= rate_bits) return 0.0;

    // For a multiplier mu, minimize D(Q||P|px) + mu * I_Q(X;Y) by alternating
    // the exact row update Q(y|x) ~ [P(y|x) r(y)^mu]^{1/(1+mu)} with the
    // marginal update r = Q' px. The minimizer keeps Q << P rowwise.
    auto solve = [&](double mu) -> std::pair<double, double> {  // (I, D)
        Mat q = p;
        Vec rmarg = p.transpose() * input_pmf;
        const double e = 1.0 / (1.0 + mu);
        for (int it = 0; it < 20000; ++it) {
            Mat qn(nx, ny);
            for (long x = 0; x < nx; ++x) {
                double z = 0.0;
                for (long y = 0; y < ny; ++y) {
                    double v = (p(x, y) > 0.0 && rmarg(y) > 0.0)
                                   ? std::exp(e * std::log(p(x, y)) +
                                              mu * e * std::log(rmarg(y)))
                                   : 0.0;
                    qn(x, y) = v;
                    z += v;
                }
                qn.row(x) /= z;
            }
            Vec rn = qn.transpose() * input_pmf;
            double delta = (qn - q).cwiseAbs().maxCoeff() + (rn - rmarg).cwiseAbs().maxCoeff();
            q = std::move(qn);
            rmarg = std::move(rn);
            if (delta < 1e-14) break;
        }
        return {channel_mutual_information(input_pmf, q),
                conditional_divergence(q, p, input_pmf)};
    };

    double mu_lo = 0.0, mu_hi = 1.0;
    auto hi = solve(mu_hi);
    int guard = 0;
    while (hi.first > rate_bits && guard++ < 80) {
        mu_hi *= 2.0;
        hi = solve(mu_hi);
    }
    double best = hi.second;
    for (int k = 0; k < resolution; ++k) {
        double mu = 0.5 * (mu_lo + mu_hi);
        auto r = solve(mu);
        if (r.first <= rate_bits) {
            mu_hi = mu;
            best = r.second;
        } else {
            mu_lo = mu;
        }
        if (std::abs(r.first - rate_bits) < 1e-13) {
            best = r.second;
            break;
        }
    }
    return best;
}

StateChannel::StateChannel(FinitePmf state_pmf_, std::vector<Mat> per_state_)
    : state_pmf(std::move(state_pmf_)), per_state(std::move(per_state_)) {
    if (per_state.empty() || static_cast<int>(per_state.size()) != state_pmf.size())
        throw std::invalid_argument("StateChannel: one matrix per state required");
    for (const Mat& m : per_state) {
        check_row_stochastic(m, "StateChannel");
        if (m.rows() != per_state.front().rows() || m.cols() != per_state.front().cols())
            throw std::invalid_argument("StateChannel: inconsistent matrix shapes");
    }
}

Dmc StateChannel::averaged() const {
    Mat m = Mat::Zero(input_size(), output_size());
    for (int s = 0; s < state_size(); ++s) m += state_pmf(s) * per_state[s];
    return Dmc(std::move(m));
}

ShannonStrategyResult causal_state_capacity(const StateChannel& sch,
                                            const std::optional<CostFunction>& cost,
                                            long strategy_cap, const CapacityOptions& opts) {
    const int ns = sch.state_size(), nx = sch.input_size(), ny = sch.output_size();
    long nt = 1;
    for (int s = 0; s < ns; ++s) {
        nt *= nx;
        if (nt > strategy_cap)
            throw ResourceError("causal_state_capacity: strategy alphabet exceeds cap");
    }
    if (cost && cost->phi.size() != nx)
        throw std::invalid_argument("causal_state_capacity: cost table size mismatch");

    Mat derived = Mat::Zero(nt, ny);
    Vec dcost = Vec::Zero(nt);
    std::vector<int> digits(ns);
    for (long t = 0; t < nt; ++t) {
        unpack_block(t, nx, digits);  // digits[s] = t(s), state 0 most significant
        for (int s = 0; s < ns; ++s) {
            derived.row(t) += sch.state_pmf(s) * sch.per_state[s].row(digits[s]);
            if (cost) dcost(t) += sch.state_pmf(s) * cost->phi(digits[s]);
        }
    }
    Dmc dch(derived);
    std::optional<CostFunction> dcf;
    if (cost) dcf.emplace(dcost, cost->budget);
    CapacityResult cr = capacity(dch, dcf, opts);
    return {cr.value_bits, std::move(cr.input_pmf), std::move(dch),
            cost ? std::move(dcost) : Vec()};
}

}  // namespace fscb
