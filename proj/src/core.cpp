#include "fscb/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace fscb {

namespace {

constexpr double kPmfTol = 1e-12;

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

void check_pmf(const Vec& p, const char* what) {
    if (p.size() == 0) throw std::invalid_argument(std::string(what) + ": empty support");
    if ((p.array() < 0.0).any())
        throw std::invalid_argument(std::string(what) + ": negative probability");
    if (std::abs(p.sum() - 1.0) > kPmfTol)
        throw std::invalid_argument(std::string(what) + ": probabilities do not sum to 1");
}

long checked_pow(int base, int exponent, long cap) {
    long r = 1;
    for (int i = 0; i < exponent; ++i) {
        r *= base;
        if (r > cap)
            throw ResourceError("superalphabet size " + std::to_string(base) + "^" +
                                std::to_string(exponent) + " exceeds cap");
    }
    return r;
}

}  // namespace

Alphabet::Alphabet(int size_, std::vector<std::string> labels_)
    : size(size_), labels(std::move(labels_)) {
    if (size < 1) throw std::invalid_argument("Alphabet: size must be >= 1");
    if (size > kMaxAlphabetSize) throw ResourceError("Alphabet: size exceeds cap");
    if (!labels.empty()) {
        if (static_cast<int>(labels.size()) != size)
            throw std::invalid_argument("Alphabet: label count does not match size");
        std::set<std::string> uniq(labels.begin(), labels.end());
        if (static_cast<int>(uniq.size()) != size)
            throw std::invalid_argument("Alphabet: duplicate labels");
    }
}

SymbolSequence::SymbolSequence(int alphabet_size, std::vector<int> symbols)
    : alphabet_size_(alphabet_size), symbols_(std::move(symbols)) {
    if (alphabet_size_ < 1) throw std::invalid_argument("SymbolSequence: alphabet size < 1");
    for (int s : symbols_)
        if (s < 0 || s >= alphabet_size_)
            throw std::invalid_argument("SymbolSequence: symbol out of range");
}

SymbolSequence SymbolSequence::from_string(const std::string& digits, int alphabet_size) {
    std::vector<int> sym;
    sym.reserve(digits.size());
    for (char c : digits) {
        if (c < '0' || c > '9') throw std::invalid_argument("from_string: non-digit character");
        sym.push_back(c - '0');
    }
    return SymbolSequence(alphabet_size, std::move(sym));
}

FinitePmf::FinitePmf(Vec probs) : p_(std::move(probs)) { check_pmf(p_, "FinitePmf"); }

FinitePmf FinitePmf::uniform(int m) {
    if (m < 1) throw std::invalid_argument("uniform: m < 1");
    return FinitePmf(Vec::Constant(m, 1.0 / m));
}

FinitePmf FinitePmf::point_mass(int m, int atom) {
    if (atom < 0 || atom >= m) throw std::invalid_argument("point_mass: atom out of range");
    Vec p = Vec::Zero(m);
    p(atom) = 1.0;
    return FinitePmf(std::move(p));
}

JointPmf::JointPmf(std::vector<int> dims, Vec probs)
    : dims_(std::move(dims)), p_(std::move(probs)) {
    if (dims_.empty()) throw std::invalid_argument("JointPmf: no components");
    long total = 1;
    for (int d : dims_) {
        if (d < 1) throw std::invalid_argument("JointPmf: component size < 1");
        total *= d;
        if (total > (1L << 24)) throw ResourceError("JointPmf: product space too large");
    }
    if (p_.size() != total) throw std::invalid_argument("JointPmf: size mismatch");
    check_pmf(p_, "JointPmf");
    strides_.assign(dims_.size(), 1);
    for (int k = static_cast<int>(dims_.size()) - 2; k >= 0; --k)
        strides_[k] = strides_[k + 1] * dims_[k + 1];
}

long JointPmf::flat_index(std::span<const int> index) const {
    if (index.size() != dims_.size()) throw std::invalid_argument("flat_index: rank mismatch");
    long f = 0;
    for (size_t k = 0; k < dims_.size(); ++k) {
        if (index[k] < 0 || index[k] >= dims_[k])
            throw std::invalid_argument("flat_index: component out of range");
        f += index[k] * strides_[k];
    }
    return f;
}

void JointPmf::unflatten(long flat, std::span<int> out) const {
    for (size_t k = 0; k < dims_.size(); ++k) {
        out[k] = static_cast<int>(flat / strides_[k]);
        flat %= strides_[k];
    }
}

double JointPmf::at(std::span<const int> index) const { return p_(flat_index(index)); }

JointPmf JointPmf::marginal(const std::vector<int>& components) const {
    if (components.empty()) throw std::invalid_argument("marginal: no components");
    std::vector<int> out_dims;
    long out_total = 1;
    for (int c : components) {
        if (c < 0 || c >= rank()) throw std::invalid_argument("marginal: bad component");
        out_dims.push_back(dims_[c]);
        out_total *= dims_[c];
    }
    Vec out = Vec::Zero(out_total);
    std::vector<int> idx(dims_.size());
    for (long f = 0; f < p_.size(); ++f) {
        if (p_(f) == 0.0) continue;
        unflatten(f, idx);
        long of = 0;
        for (int c : components) of = of * dims_[c] + idx[static_cast<size_t>(c)];
        out(of) += p_(f);
    }
    // Renormalize away accumulated rounding so downstream validation holds.
    out /= out.sum();
    return JointPmf(std::move(out_dims), std::move(out));
}

FinitePmf JointPmf::marginal(int component) const {
    return FinitePmf(marginal(std::vector<int>{component}).probs());
}

long pack_block(std::span<const int> block, int alphabet_size) {
    long idx = 0;
    for (int s : block) idx = idx * alphabet_size + s;
    return idx;
}

void unpack_block(long index, int alphabet_size, std::span<int> out) {
    for (size_t k = out.size(); k-- > 0;) {
        out[k] = static_cast<int>(index % alphabet_size);
        index /= alphabet_size;
    }
}

BlockEmpirical block_empirical(const SymbolSequence& seq, int block_len) {
    if (block_len < 1) throw std::invalid_argument("block_empirical: block_len < 1");
    if (seq.size() < block_len)
        throw std::invalid_argument("block_empirical: sequence shorter than one block");
    long super = checked_pow(seq.alphabet_size(), block_len, kMaxAlphabetSize);
    long blocks = seq.size() / block_len;
    Vec counts = Vec::Zero(super);
    for (long b = 0; b < blocks; ++b) {
        std::span<const int> blk(seq.symbols().data() + b * block_len,
                                 static_cast<size_t>(block_len));
        counts(pack_block(blk, seq.alphabet_size())) += 1.0;
    }
    counts /= static_cast<double>(blocks);
    return BlockEmpirical{FinitePmf(std::move(counts)), block_len, blocks,
                          seq.size() - blocks * block_len};
}

JointPmf joint_block_empirical(std::span<const SymbolSequence> seqs, int block_len) {
    if (seqs.empty()) throw std::invalid_argument("joint_block_empirical: no sequences");
    if (block_len < 1) throw std::invalid_argument("joint_block_empirical: block_len < 1");
    long n = seqs[0].size();
    for (const auto& s : seqs)
        if (s.size() != n)
            throw std::invalid_argument("joint_block_empirical: sequence lengths differ");
    if (n < block_len)
        throw std::invalid_argument("joint_block_empirical: sequences shorter than one block");

    std::vector<int> dims;
    long total = 1;
    for (const auto& s : seqs) {
        long super = checked_pow(s.alphabet_size(), block_len, kMaxAlphabetSize);
        dims.push_back(static_cast<int>(super));
        total *= super;
        if (total > (1L << 24)) throw ResourceError("joint_block_empirical: product space too large");
    }

    long blocks = n / block_len;
    Vec counts = Vec::Zero(total);
    for (long b = 0; b < blocks; ++b) {
        long f = 0;
        for (size_t k = 0; k < seqs.size(); ++k) {
            std::span<const int> blk(seqs[k].symbols().data() + b * block_len,
                                     static_cast<size_t>(block_len));
            f = f * dims[k] + pack_block(blk, seqs[k].alphabet_size());
        }
        counts(f) += 1.0;
    }
    counts /= static_cast<double>(blocks);
    return JointPmf(std::move(dims), std::move(counts));
}

DistortionMeasure::DistortionMeasure(Mat table) : rho_(std::move(table)) {
    if (rho_.rows() < 1 || rho_.cols() < 1)
        throw std::invalid_argument("DistortionMeasure: empty table");
    if (!rho_.allFinite() || (rho_.array() < 0.0).any())
        throw std::invalid_argument("DistortionMeasure: entries must be finite and nonnegative");
    rho_max_ = rho_.maxCoeff();
}

DistortionMeasure DistortionMeasure::hamming(int n) {
    Mat t = Mat::Ones(n, n) - Mat::Identity(n, n);
    return DistortionMeasure(std::move(t));
}

DistortionMeasure DistortionMeasure::block_extension(int block_len) const {
    if (block_len < 1) throw std::invalid_argument("block_extension: block_len < 1");
    long su = checked_pow(source_size(), block_len, kMaxAlphabetSize);
    long sv = checked_pow(recon_size(), block_len, kMaxAlphabetSize);
    if (su * sv > (1L << 24)) throw ResourceError("block_extension: table too large");
    Mat t = Mat::Zero(su, sv);
    std::vector<int> ub(block_len), vb(block_len);
    for (long ui = 0; ui < su; ++ui) {
        unpack_block(ui, source_size(), ub);
        for (long vi = 0; vi < sv; ++vi) {
            unpack_block(vi, recon_size(), vb);
            double s = 0.0;
            for (int k = 0; k < block_len; ++k) s += rho_(ub[k], vb[k]);
            t(ui, vi) = s;
        }
    }
    return DistortionMeasure(std::move(t));
}

double average_distortion(const SymbolSequence& u, const SymbolSequence& v,
                          const DistortionMeasure& rho) {
    if (u.size() != v.size())
        throw std::invalid_argument("average_distortion: length mismatch");
    double s = 0.0;
    for (long i = 0; i < u.size(); ++i) s += rho(u[i], v[i]);
    return s / static_cast<double>(u.size());
}

double entropy(const FinitePmf& p) {
    double h = 0.0;
    for (int i = 0; i < p.size(); ++i) h -= xlog2x(p(i));
    return h;
}

double entropy(const JointPmf& joint, const std::vector<int>& comps) {
    const Vec& p = joint.marginal(comps).probs();
    double h = 0.0;
    for (long i = 0; i < p.size(); ++i) h -= xlog2x(p(i));
    return h;
}

double entropy(const JointPmf& joint) {
    double h = 0.0;
    for (long i = 0; i < joint.probs().size(); ++i) h -= xlog2x(joint.probs()(i));
    return h;
}

namespace {
std::vector<int> concat(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> r = a;
    r.insert(r.end(), b.begin(), b.end());
    return r;
}
}  // namespace

double conditional_entropy(const JointPmf& joint, const std::vector<int>& a,
                           const std::vector<int>& b) {
    return entropy(joint, concat(a, b)) - entropy(joint, b);
}

double mutual_information(const JointPmf& joint, const std::vector<int>& a,
                          const std::vector<int>& b) {
    return entropy(joint, a) + entropy(joint, b) - entropy(joint, concat(a, b));
}

double conditional_mutual_information(const JointPmf& joint, const std::vector<int>& a,
                                      const std::vector<int>& b, const std::vector<int>& c) {
    return entropy(joint, concat(a, c)) + entropy(joint, concat(b, c)) -
           entropy(joint, concat(concat(a, b), c)) - entropy(joint, c);
}

double conditional_divergence(const Mat& q, const Mat& p, const Vec& prior) {
    if (q.rows() != p.rows() || q.cols() != p.cols() || prior.size() != q.rows())
        throw std::invalid_argument("conditional_divergence: shape mismatch");
    double d = 0.0;
    for (long x = 0; x < q.rows(); ++x) {
        if (prior(x) <= 0.0) continue;
        double row = 0.0;
        for (long y = 0; y < q.cols(); ++y) {
            if (q(x, y) <= 0.0) continue;
            if (p(x, y) <= 0.0) return std::numeric_limits<double>::infinity();
            row += q(x, y) * std::log2(q(x, y) / p(x, y));
        }
        d += prior(x) * row;
    }
    return std::max(d, 0.0);
}

double divergence(const Vec& q, const Vec& p) {
    if (q.size() != p.size()) throw std::invalid_argument("divergence: shape mismatch");
    double d = 0.0;
    for (long i = 0; i < q.size(); ++i) {
        if (q(i) <= 0.0) continue;
        if (p(i) <= 0.0) return std::numeric_limits<double>::infinity();
        d += q(i) * std::log2(q(i) / p(i));
    }
    return std::max(d, 0.0);
}

double channel_mutual_information(const Vec& px, const Mat& w) {
    if (px.size() != w.rows())
        throw std::invalid_argument("channel_mutual_information: shape mismatch");
    Vec qy = w.transpose() * px;
    double mi = 0.0;
    for (long x = 0; x < w.rows(); ++x) {
        if (px(x) <= 0.0) continue;
        for (long y = 0; y < w.cols(); ++y) {
            if (w(x, y) <= 0.0) continue;
            mi += px(x) * w(x, y) * std::log2(w(x, y) / qy(y));
        }
    }
    return std::max(mi, 0.0);
}

}  // namespace fscb
