#include "roughmix/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "roughmix/error.hpp"

namespace roughmix {

TruncatedTensor::TruncatedTensor(int dim, int level) : dim_(dim), level_(level) {
    if (dim < 1) throw DomainError("TruncatedTensor: dim must be >= 1");
    if (level < 1) throw DomainError("TruncatedTensor: level must be >= 1");
    offsets_.resize(static_cast<std::size_t>(level) + 2);
    std::size_t total = 0;
    std::size_t width = 1;
    for (int n = 0; n <= level; ++n) {
        offsets_[static_cast<std::size_t>(n)] = total;
        total += width;
        if (total > kMaxTensorEntries)
            throw ConfigError("TruncatedTensor: d^0 + ... + d^N exceeds the entry cap");
        width *= static_cast<std::size_t>(dim);
    }
    offsets_.back() = total;
    data_.assign(total, 0.0);
}

std::span<double> TruncatedTensor::level_data(int n) {
    const auto k = static_cast<std::size_t>(n);
    return {data_.data() + offsets_.at(k), offsets_.at(k + 1) - offsets_[k]};
}

std::span<const double> TruncatedTensor::level_data(int n) const {
    const auto k = static_cast<std::size_t>(n);
    return {data_.data() + offsets_.at(k), offsets_.at(k + 1) - offsets_[k]};
}

std::size_t TruncatedTensor::word_offset(const Word& w) const {
    if (w.size() > static_cast<std::size_t>(level_)) throw DomainError("word longer than truncation level");
    std::size_t idx = 0;
    for (int letter : w.letters) {
        if (letter < 1 || letter > dim_) throw DomainError("word letter out of range");
        idx = idx * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(letter - 1);
    }
    return offsets_[w.size()] + idx;
}

double TruncatedTensor::operator[](const Word& w) const { return data_[word_offset(w)]; }
double& TruncatedTensor::operator[](const Word& w) { return data_[word_offset(w)]; }

double TruncatedTensor::level_norm(int n) const {
    double m = 0.0;
    for (double v : level_data(n)) m = std::max(m, std::abs(v));
    return m;
}

TruncatedTensor& TruncatedTensor::operator+=(const TruncatedTensor& rhs) {
    check_composable(*this, rhs);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

TruncatedTensor& TruncatedTensor::operator-=(const TruncatedTensor& rhs) {
    check_composable(*this, rhs);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

TruncatedTensor& TruncatedTensor::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

void check_composable(const TruncatedTensor& a, const TruncatedTensor& b) {
    if (a.dim() != b.dim() || a.level() != b.level())
        throw ComposabilityError("tensors differ in (dim, level)");
}

TruncatedTensor unit(int dim, int level) {
    TruncatedTensor t(dim, level);
    t.scalar() = 1.0;
    return t;
}

TruncatedTensor from_vector(std::span<const double> v, int level) {
    TruncatedTensor t(static_cast<int>(v.size()), level);
    std::copy(v.begin(), v.end(), t.level_data(1).begin());
    return t;
}

TruncatedTensor mul(const TruncatedTensor& x, const TruncatedTensor& y) {
    check_composable(x, y);
    TruncatedTensor out(x.dim(), x.level());
    for (int n = 0; n <= x.level(); ++n) {
        auto dst = out.level_data(n);
        for (int i = 0; i <= n; ++i) {
            auto a = x.level_data(i);
            auto b = y.level_data(n - i);
            const std::size_t bw = b.size();
            for (std::size_t p = 0; p < a.size(); ++p) {
                const double ap = a[p];
                if (ap == 0.0) continue;
                double* row = dst.data() + p * bw;
                for (std::size_t q = 0; q < bw; ++q) row[q] += ap * b[q];
            }
        }
    }
    return out;
}

void mul_exp_increment(TruncatedTensor& x, std::span<const double> v) {
    const auto d = static_cast<std::size_t>(x.dim());
    if (v.size() != d) throw ComposabilityError("mul_exp_increment: increment dimension mismatch");
    std::vector<double> acc, next;
    for (int n = x.level(); n >= 1; --n) {
        // Horner: B_0 = x_0, B_j = B_{j-1} (x) v / (n - j + 1) + x_j; new x_n = B_n.
        acc.assign(1, x.scalar());
        for (int j = 1; j <= n; ++j) {
            const double inv = 1.0 / static_cast<double>(n - j + 1);
            auto xj = x.level_data(j);
            next.resize(acc.size() * d);
            for (std::size_t p = 0; p < acc.size(); ++p) {
                const double ap = acc[p] * inv;
                for (std::size_t q = 0; q < d; ++q) next[p * d + q] = ap * v[q] + xj[p * d + q];
            }
            acc.swap(next);
        }
        std::copy(acc.begin(), acc.end(), x.level_data(n).begin());
    }
}

TruncatedTensor exp(const TruncatedTensor& x) {
    if (x.scalar() != 0.0) throw DomainError("exp: scalar part must be zero");
    // Horner: r <- 1 + x r / k for k = N..1.
    TruncatedTensor r = unit(x.dim(), x.level());
    for (int k = x.level(); k >= 1; --k) {
        r = mul(x, r);
        r *= 1.0 / static_cast<double>(k);
        r.scalar() += 1.0;
    }
    return r;
}

TruncatedTensor log(const TruncatedTensor& x) {
    if (x.scalar() != 1.0) throw DomainError("log: scalar part must be one");
    TruncatedTensor y = x;
    y.scalar() = 0.0;
    TruncatedTensor out(x.dim(), x.level());
    TruncatedTensor power = y;
    for (int k = 1; k <= x.level(); ++k) {
        const double c = (k % 2 == 1 ? 1.0 : -1.0) / static_cast<double>(k);
        out += power * c;
        if (k < x.level()) power = mul(power, y);
    }
    return out;
}

TruncatedTensor inverse(const TruncatedTensor& x) {
    if (x.scalar() != 1.0) throw DomainError("inverse: scalar part must be one");
    TruncatedTensor minus_y = x;
    minus_y.scalar() = 0.0;
    minus_y *= -1.0;
    TruncatedTensor out = unit(x.dim(), x.level());
    TruncatedTensor power = unit(x.dim(), x.level());
    for (int k = 1; k <= x.level(); ++k) {
        power = mul(power, minus_y);
        out += power;
    }
    return out;
}

double max_abs_diff(const TruncatedTensor& a, const TruncatedTensor& b) {
    check_composable(a, b);
    double m = 0.0;
    for (std::size_t i = 0; i < a.raw().size(); ++i) m = std::max(m, std::abs(a.raw()[i] - b.raw()[i]));
    return m;
}

namespace {

void shuffle_into(const Word& u, std::size_t nu, const Word& v, std::size_t nv, Word& suffix, WordSum& out) {
    if (nu == 0 || nv == 0) {
        Word w;
        const Word& rest = nu == 0 ? v : u;
        const std::size_t nr = nu == 0 ? nv : nu;
        w.letters.assign(rest.letters.begin(), rest.letters.begin() + static_cast<std::ptrdiff_t>(nr));
        w.letters.insert(w.letters.end(), suffix.letters.rbegin(), suffix.letters.rend());
        ++out[w];
        return;
    }
    suffix.letters.push_back(u.letters[nu - 1]);
    shuffle_into(u, nu - 1, v, nv, suffix, out);
    suffix.letters.back() = v.letters[nv - 1];
    shuffle_into(u, nu, v, nv - 1, suffix, out);
    suffix.letters.pop_back();
}

std::size_t lex_index(const std::vector<int>& letters, std::size_t dim) {
    std::size_t idx = 0;
    for (int l : letters) idx = idx * dim + static_cast<std::size_t>(l - 1);
    return idx;
}

}  // namespace

WordSum shuffle(const Word& u, const Word& v, int level) {
    if (static_cast<int>(u.size() + v.size()) > level)
        throw DomainError("shuffle: combined length exceeds the truncation level");
    WordSum out;
    Word suffix;
    shuffle_into(u, u.size(), v, v.size(), suffix, out);
    return out;
}

std::vector<Word> words_of_length(int dim, int n) {
    std::vector<Word> out;
    Word w;
    w.letters.assign(static_cast<std::size_t>(n), 1);
    while (true) {
        out.push_back(w);
        int pos = n - 1;
        while (pos >= 0 && w.letters[static_cast<std::size_t>(pos)] == dim) {
            w.letters[static_cast<std::size_t>(pos)] = 1;
            --pos;
        }
        if (pos < 0) break;
        ++w.letters[static_cast<std::size_t>(pos)];
    }
    return out;
}

GroupLikeReport is_group_like(const TruncatedTensor& x, double tol) {
    GroupLikeReport rep;
    rep.max_violation = std::abs(x.scalar() - 1.0);
    const auto dim = static_cast<std::size_t>(x.dim());
    std::vector<int> merged;
    for (int a = 1; a < x.level(); ++a) {
        const auto us = words_of_length(x.dim(), a);
        for (int b = 1; a + b <= x.level(); ++b) {
            const auto vs = words_of_length(x.dim(), b);
            const int n = a + b;
            auto level_n = x.level_data(n);
            for (const Word& u : us) {
                const double xu = x[u];
                for (const Word& v : vs) {
                    // Sum over interleavings: bit i of mask set = position i takes the next letter of u.
                    double rhs = 0.0;
                    merged.resize(static_cast<std::size_t>(n));
                    for (unsigned mask = 0; mask < (1u << n); ++mask) {
                        if (std::popcount(mask) != a) continue;
                        std::size_t iu = 0, iv = 0;
                        for (int i = 0; i < n; ++i)
                            merged[static_cast<std::size_t>(i)] =
                                (mask >> i) & 1u ? u.letters[iu++] : v.letters[iv++];
                        rhs += level_n[lex_index(merged, dim)];
                    }
                    const double viol = std::abs(xu * x[v] - rhs);
                    if (viol > rep.max_violation) {
                        rep.max_violation = viol;
                        rep.worst_u = u;
                        rep.worst_v = v;
                    }
                }
            }
        }
    }
    rep.passed = rep.max_violation <= tol;
    return rep;
}

}  // namespace roughmix
