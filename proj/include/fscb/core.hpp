// Finite alphabets, symbol sequences, empirical block statistics, PMF
// algebra and base-2 information measures. Everything here is immutable
// after construction and safe to share across threads.
#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fscb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Thrown when a requested operating point cannot be met (budget below the
// cheapest input, distortion below the minimum achievable, ...).
struct FeasibilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a computation would exceed a configured size cap.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Component alphabets are capped; superalphabets (alpha^l) must stay under
// this as well.
inline constexpr long kMaxAlphabetSize = 1L << 16;

struct Alphabet {
    int size = 0;
    std::vector<std::string> labels;  // empty, or exactly `size` unique labels

    explicit Alphabet(int size_, std::vector<std::string> labels_ = {});
};

class SymbolSequence {
public:
    SymbolSequence(int alphabet_size, std::vector<int> symbols);

    static SymbolSequence from_string(const std::string& digits, int alphabet_size);

    int alphabet_size() const { return alphabet_size_; }
    long size() const { return static_cast<long>(symbols_.size()); }
    int operator[](long i) const { return symbols_[static_cast<size_t>(i)]; }
    const std::vector<int>& symbols() const { return symbols_; }

private:
    int alphabet_size_;
    std::vector<int> symbols_;
};

class FinitePmf {
public:
    explicit FinitePmf(Vec probs);

    static FinitePmf uniform(int m);
    static FinitePmf point_mass(int m, int atom);

    int size() const { return static_cast<int>(p_.size()); }
    double operator()(int i) const { return p_(i); }
    const Vec& probs() const { return p_; }

private:
    Vec p_;
};

// PMF over a product of finite alphabets, stored flat in row-major order
// (first component most significant).
class JointPmf {
public:
    JointPmf(std::vector<int> dims, Vec probs);

    int rank() const { return static_cast<int>(dims_.size()); }
    const std::vector<int>& dims() const { return dims_; }
    long total_size() const { return p_.size(); }
    const Vec& probs() const { return p_; }

    double at(std::span<const int> index) const;
    long flat_index(std::span<const int> index) const;
    void unflatten(long flat, std::span<int> out) const;

    // Marginal over the given components, in the given order.
    JointPmf marginal(const std::vector<int>& components) const;
    FinitePmf marginal(int component) const;

private:
    std::vector<int> dims_;
    std::vector<long> strides_;
    Vec p_;
};

// --- empirical block statistics -------------------------------------------

// Packs an l-block into a superalphabet index, first symbol most significant.
long pack_block(std::span<const int> block, int alphabet_size);
void unpack_block(long index, int alphabet_size, std::span<int> out);

struct BlockEmpirical {
    FinitePmf pmf;        // over alphabet_size^block_len
    int block_len = 1;
    long blocks = 0;      // non-overlapping blocks counted
    long truncated = 0;   // trailing symbols dropped when block_len does not divide n
};

BlockEmpirical block_empirical(const SymbolSequence& seq, int block_len);

// Joint PMF of aligned l-blocks from several sequences; dims are the
// per-sequence superalphabet sizes.
JointPmf joint_block_empirical(std::span<const SymbolSequence> seqs, int block_len);

// --- distortion ------------------------------------------------------------

class DistortionMeasure {
public:
    explicit DistortionMeasure(Mat table);

    static DistortionMeasure hamming(int n);

    int source_size() const { return static_cast<int>(rho_.rows()); }
    int recon_size() const { return static_cast<int>(rho_.cols()); }
    double operator()(int u, int v) const { return rho_(u, v); }
    const Mat& table() const { return rho_; }
    double max() const { return rho_max_; }

    // Additive extension to length-l blocks over the superalphabets.
    DistortionMeasure block_extension(int block_len) const;

private:
    Mat rho_;
    double rho_max_;
};

double average_distortion(const SymbolSequence& u, const SymbolSequence& v,
                          const DistortionMeasure& rho);

// --- information measures (bits, 0 log 0 = 0) -------------------------------

double entropy(const FinitePmf& p);
double entropy(const JointPmf& joint, const std::vector<int>& comps);
double entropy(const JointPmf& joint);
// H(a | b)
double conditional_entropy(const JointPmf& joint, const std::vector<int>& a,
                           const std::vector<int>& b);
// I(a ; b)
double mutual_information(const JointPmf& joint, const std::vector<int>& a,
                          const std::vector<int>& b);
// I(a ; b | c)
double conditional_mutual_information(const JointPmf& joint, const std::vector<int>& a,
                                      const std::vector<int>& b, const std::vector<int>& c);

// D(q || p | prior) over row-stochastic matrices; +inf when absolute
// continuity fails on a row with positive prior.
double conditional_divergence(const Mat& q, const Mat& p, const Vec& prior);

// Plain divergence between two distributions on the same support.
double divergence(const Vec& q, const Vec& p);

// Mutual information of the channel `w` (rows = inputs) driven by `px`, bits.
double channel_mutual_information(const Vec& px, const Mat& w);

}  // namespace fscb
