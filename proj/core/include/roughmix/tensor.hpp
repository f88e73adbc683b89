#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace roughmix {

/// Upper bound on the total number of stored coefficients of a tensor.
inline constexpr std::size_t kMaxTensorEntries = 10'000'000;
/// Truncation level used when callers do not choose one.
inline constexpr int kDefaultLevel = 4;

/// A word over the alphabet {1, ..., d}; addresses one tensor coordinate.
struct Word {
    std::vector<int> letters;

    std::size_t size() const noexcept { return letters.size(); }
    bool empty() const noexcept { return letters.empty(); }

    friend auto operator<=>(const Word&, const Word&) = default;
};

/// Formal sum of words with integer multiplicities.
using WordSum = std::map<Word, long>;

/// Element of the truncated tensor algebra T^N(R^d).
///
/// Level n holds d^n coefficients in lexicographic word order: the word
/// (i_1, ..., i_n) lives at offset sum_k (i_k - 1) d^{n-k}. All levels are
/// stored contiguously.
class TruncatedTensor {
public:
    /// The zero tensor. Throws ConfigError when d^0 + ... + d^N exceeds
    /// kMaxTensorEntries, DomainError when dim or level is < 1.
    TruncatedTensor(int dim, int level);

    int dim() const noexcept { return dim_; }
    int level() const noexcept { return level_; }

    double scalar() const noexcept { return data_[0]; }
    double& scalar() noexcept { return data_[0]; }

    std::span<double> level_data(int n);
    std::span<const double> level_data(int n) const;

    /// Coefficient of a word (empty word = scalar part).
    double operator[](const Word& w) const;
    double& operator[](const Word& w);

    std::span<const double> raw() const noexcept { return data_; }
    std::span<double> raw() noexcept { return data_; }

    /// Max-absolute-entry norm of level n.
    double level_norm(int n) const;

    TruncatedTensor& operator+=(const TruncatedTensor& rhs);
    TruncatedTensor& operator-=(const TruncatedTensor& rhs);
    TruncatedTensor& operator*=(double s);

    friend TruncatedTensor operator+(TruncatedTensor a, const TruncatedTensor& b) { return a += b; }
    friend TruncatedTensor operator-(TruncatedTensor a, const TruncatedTensor& b) { return a -= b; }
    friend TruncatedTensor operator*(TruncatedTensor a, double s) { return a *= s; }
    friend TruncatedTensor operator*(double s, TruncatedTensor a) { return a *= s; }

    friend bool operator==(const TruncatedTensor&, const TruncatedTensor&) = default;

private:
    std::size_t word_offset(const Word& w) const;

    int dim_;
    int level_;
    std::vector<std::size_t> offsets_;  // offsets_[n] = start of level n
    std::vector<double> data_;
};

/// Throws ComposabilityError unless (dim, level) agree.
void check_composable(const TruncatedTensor& a, const TruncatedTensor& b);

TruncatedTensor unit(int dim, int level);

/// Level-1 element with the given coefficients (zero scalar part).
TruncatedTensor from_vector(std::span<const double> v, int level);

/// Truncated product: out_n = sum_{i+j=n} x_i (x) y_j.
TruncatedTensor mul(const TruncatedTensor& x, const TruncatedTensor& y);

/// In-place x <- x (x) exp(v) for a level-1 increment v, without forming
/// exp(v). This is the per-segment update of a piecewise-linear signature.
void mul_exp_increment(TruncatedTensor& x, std::span<const double> v);

/// Truncated exponential; requires a zero scalar part.
TruncatedTensor exp(const TruncatedTensor& x);
/// Truncated logarithm; requires scalar part 1.
TruncatedTensor log(const TruncatedTensor& x);

/// Inverse of a tensor with scalar part 1.
TruncatedTensor inverse(const TruncatedTensor& x);

/// Max over levels of the level norm of (a - b).
double max_abs_diff(const TruncatedTensor& a, const TruncatedTensor& b);

/// All riffle shuffles of u and v, with multiplicity. Throws DomainError
/// when |u| + |v| > level.
WordSum shuffle(const Word& u, const Word& v, int level);

struct GroupLikeReport {
    bool passed = true;
    double max_violation = 0.0;
    Word worst_u;
    Word worst_v;
};

/// Checks <x,u><x,v> = <x, u sh v> for all nonempty words with
/// |u| + |v| <= level. A scalar part other than 1 counts as a violation of
/// size |x_0 - 1|.
GroupLikeReport is_group_like(const TruncatedTensor& x, double tol);

/// All words of length n over {1..dim} in lexicographic order.
std::vector<Word> words_of_length(int dim, int n);

}  // namespace roughmix
