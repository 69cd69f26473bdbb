#include "decouplenet/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "decouplenet/errors.hpp"

namespace dcn::empirical {

namespace {

void require_sample(const Eigen::MatrixXd& m, const char* who) {
    if (m.rows() < 1 || m.cols() < 1)
        throw DataError(std::string(who) + ": sample must be non-empty");
    if (!m.allFinite())
        throw DataError(std::string(who) + ": sample contains non-finite values");
}

// Average ranks (1-based, ties averaged) of one column.
Eigen::VectorXd average_ranks(const Eigen::VectorXd& col) {
    const Eigen::Index n = col.size();
    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](Eigen::Index a, Eigen::Index b) { return col(a) < col(b); });
    Eigen::VectorXd ranks(n);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j + 1 < n && col(idx[j + 1]) == col(idx[i]))
            ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (Eigen::Index k = i; k <= j; ++k)
            ranks(idx[k]) = avg;
        i = j + 1;
    }
    return ranks;
}

} // namespace

Sample pseudo_observations(const Eigen::MatrixXd& data) {
    require_sample(data, "pseudo_observations");
    const Eigen::Index n = data.rows();
    Eigen::MatrixXd u(n, data.cols());
    for (Eigen::Index j = 0; j < data.cols(); ++j)
        u.col(j) = average_ranks(data.col(j)) / static_cast<double>(n + 1);
    return Sample{std::move(u)};
}

double empirical_copula_eval(const Sample& points, const Eigen::VectorXd& u) {
    require_sample(points.values, "empirical_copula_eval");
    if (u.size() != points.d())
        throw DataError("empirical_copula_eval: dimension mismatch");
    const Eigen::Index n = points.n();
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        bool below = true;
        for (Eigen::Index j = 0; j < points.d() && below; ++j)
            below = points.values(i, j) <= u(j);
        count += below;
    }
    return static_cast<double>(count) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Kendall's tau
// ---------------------------------------------------------------------------

namespace {

struct PairCounts {
    std::int64_t n0 = 0; // all pairs
    std::int64_t n1 = 0; // pairs tied in x (both-tied included)
    std::int64_t n2 = 0; // pairs tied in y (both-tied included)
    std::int64_t n3 = 0; // pairs tied in both
    std::int64_t q = 0;  // strictly discordant pairs
};

double tau_from_counts(const PairCounts& c, const char* who) {
    if (c.n0 == c.n1 || c.n0 == c.n2)
        throw DataError(std::string(who) + ": a column is constant, tau is undefined");
    const double num = static_cast<double>(c.n0 - c.n1 - c.n2 + c.n3 - 2 * c.q);
    // One sqrt of the product keeps the tie-free endpoints exactly +-1.
    return num / std::sqrt(static_cast<double>(c.n0 - c.n1) *
                           static_cast<double>(c.n0 - c.n2));
}

std::int64_t tied_pairs_sorted(const std::vector<double>& v) {
    std::int64_t total = 0;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        while (j + 1 < v.size() && v[j + 1] == v[i])
            ++j;
        const std::int64_t t = static_cast<std::int64_t>(j - i + 1);
        total += t * (t - 1) / 2;
        i = j + 1;
    }
    return total;
}

// Bottom-up merge sort counting strict inversions (v[i] > v[j], i < j).
std::int64_t inversions(std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> tmp(n);
    std::int64_t inv = 0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
            const std::size_t mid = lo + width;
            const std::size_t hi = std::min(lo + 2 * width, n);
            std::size_t a = lo, b = mid, k = lo;
            while (a < mid && b < hi) {
                if (v[a] <= v[b]) {
                    tmp[k++] = v[a++];
                } else {
                    inv += static_cast<std::int64_t>(mid - a);
                    tmp[k++] = v[b++];
                }
            }
            while (a < mid)
                tmp[k++] = v[a++];
            while (b < hi)
                tmp[k++] = v[b++];
            std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
                      tmp.begin() + static_cast<std::ptrdiff_t>(hi),
                      v.begin() + static_cast<std::ptrdiff_t>(lo));
        }
    }
    return inv;
}

void require_pair(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const char* who) {
    if (x.size() != y.size())
        throw DataError(std::string(who) + ": columns differ in length");
    if (x.size() < 2)
        throw DataError(std::string(who) + ": need at least two observations");
    if (!x.allFinite() || !y.allFinite())
        throw DataError(std::string(who) + ": non-finite values");
}

} // namespace

double kendalls_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    require_pair(x, y, "kendalls_tau");
    const Eigen::Index n = x.size();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (x(a) != x(b))
            return x(a) < x(b);
        return y(a) < y(b);
    });

    PairCounts c;
    c.n0 = static_cast<std::int64_t>(n) * (n - 1) / 2;

    // Runs of tied x (and of tied (x,y) pairs) in the sorted order.
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x(idx[j + 1]) == x(idx[i]))
            ++j;
        const std::int64_t t = static_cast<std::int64_t>(j - i + 1);
        c.n1 += t * (t - 1) / 2;
        std::size_t a = i;
        while (a <= j) {
            std::size_t b = a;
            while (b + 1 <= j && y(idx[b + 1]) == y(idx[a]))
                ++b;
            const std::int64_t s = static_cast<std::int64_t>(b - a + 1);
            c.n3 += s * (s - 1) / 2;
            a = b + 1;
        }
        i = j + 1;
    }

    std::vector<double> ys(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k)
        ys[k] = y(idx[k]);
    c.q = inversions(ys); // ys is now sorted
    c.n2 = tied_pairs_sorted(ys);

    return tau_from_counts(c, "kendalls_tau");
}

double kendalls_tau_naive(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    require_pair(x, y, "kendalls_tau_naive");
    const Eigen::Index n = x.size();
    PairCounts c;
    c.n0 = static_cast<std::int64_t>(n) * (n - 1) / 2;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dx = x(i) - x(j);
            const double dy = y(i) - y(j);
            if (dx == 0.0)
                ++c.n1;
            if (dy == 0.0)
                ++c.n2;
            if (dx == 0.0 && dy == 0.0)
                ++c.n3;
            if (dx * dy < 0.0)
                ++c.q;
        }
    }
    return tau_from_counts(c, "kendalls_tau_naive");
}

Eigen::MatrixXd kendalls_tau_matrix(const Eigen::MatrixXd& data) {
    require_sample(data, "kendalls_tau_matrix");
    const Eigen::Index d = data.cols();
    Eigen::MatrixXd t = Eigen::MatrixXd::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i + 1; j < d; ++j)
            t(i, j) = t(j, i) = kendalls_tau(data.col(i), data.col(j));
    return t;
}

// ---------------------------------------------------------------------------
// Cramer-von Mises distance to independence
// ---------------------------------------------------------------------------

namespace {

// count[i] = #{ j : u_j <= u_i componentwise }, exact integer dominance
// counts.  Direct all-pairs scan; reference implementation.
std::vector<std::int64_t> dominance_counts_reference(const Eigen::MatrixXd& u) {
    const Eigen::Index n = u.rows(), d = u.cols();
    std::vector<std::int64_t> count(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::int64_t acc = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            bool below = true;
            for (Eigen::Index c = 0; c < d && below; ++c)
                below = u(j, c) <= u(i, c);
            acc += below;
        }
        count[static_cast<std::size_t>(i)] = acc;
    }
    return count;
}

// Fenwick tree over 1..size.
struct Bit {
    explicit Bit(std::size_t size) : tree(size + 1, 0) {}
    void add(std::size_t pos) {
        for (++pos; pos < tree.size(); pos += pos & (~pos + 1))
            ++tree[pos];
    }
    std::int64_t prefix(std::size_t pos) const { // # inserted with rank <= pos
        std::int64_t s = 0;
        for (++pos; pos > 0; pos -= pos & (~pos + 1))
            s += tree[pos];
        return s;
    }
    std::vector<std::int64_t> tree;
};

// Bivariate dominance counts by a plane sweep over the first column with a
// Fenwick tree on the second; ties handled exactly.
std::vector<std::int64_t> dominance_counts_2d(const Eigen::MatrixXd& u) {
    const Eigen::Index n = u.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (u(a, 0) != u(b, 0))
            return u(a, 0) < u(b, 0);
        return u(a, 1) < u(b, 1);
    });

    std::vector<double> levels(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        levels[static_cast<std::size_t>(i)] = u(i, 1);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    const auto rank_of = [&](double v) {
        return static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), v) -
                                        levels.begin());
    };

    Bit bit(levels.size());
    std::vector<std::int64_t> count(static_cast<std::size_t>(n), 0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i; // run of equal first coordinates
        while (j + 1 < order.size() && u(order[j + 1], 0) == u(order[i], 0))
            ++j;
        // Points with strictly smaller first coordinate are in the tree;
        // same-group points dominate each other through the second
        // coordinate alone.
        for (std::size_t k = i; k <= j; ++k) {
            const Eigen::Index row = order[k];
            std::int64_t within = 0;
            for (std::size_t l = i; l <= j; ++l)
                within += u(order[l], 1) <= u(row, 1);
            count[static_cast<std::size_t>(row)] = bit.prefix(rank_of(u(row, 1))) + within;
        }
        for (std::size_t k = i; k <= j; ++k)
            bit.add(rank_of(u(order[k], 1)));
        i = j + 1;
    }
    return count;
}

// d >= 3: sweep the first column, scan the remaining coordinates of the
// accumulated prefix with a branch-free kernel.
std::vector<std::int64_t> dominance_counts_nd(const Eigen::MatrixXd& u) {
    const Eigen::Index n = u.rows(), d = u.cols();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return u(a, 0) < u(b, 0);
    });

    // Prefix buffers, one contiguous array per trailing coordinate.
    std::vector<std::vector<double>> buf(static_cast<std::size_t>(d - 1));
    for (auto& b : buf)
        b.resize(static_cast<std::size_t>(n));

    std::vector<std::int64_t> count(static_cast<std::size_t>(n), 0);
    std::size_t i = 0, filled = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && u(order[j + 1], 0) == u(order[i], 0))
            ++j;
        for (std::size_t k = i; k <= j; ++k)
            for (Eigen::Index c = 1; c < d; ++c)
                buf[static_cast<std::size_t>(c - 1)][filled + (k - i)] = u(order[k], c);
        filled += j - i + 1;

        for (std::size_t k = i; k <= j; ++k) {
            const Eigen::Index row = order[k];
            std::int64_t acc = 0;
            if (d == 3) {
                const double v1 = u(row, 1), v2 = u(row, 2);
                const double* b1 = buf[0].data();
                const double* b2 = buf[1].data();
                for (std::size_t t = 0; t < filled; ++t)
                    acc += static_cast<std::int64_t>((b1[t] <= v1) & (b2[t] <= v2));
            } else {
                for (std::size_t t = 0; t < filled; ++t) {
                    int ok = 1;
                    for (Eigen::Index c = 1; c < d; ++c)
                        ok &= buf[static_cast<std::size_t>(c - 1)][t] <= u(row, c);
                    acc += ok;
                }
            }
            count[static_cast<std::size_t>(row)] = acc;
        }
        i = j + 1;
    }
    return count;
}

double cvm_from_counts(const Eigen::MatrixXd& u, const std::vector<std::int64_t>& count) {
    const Eigen::Index n = u.rows(), d = u.cols();
    const double inv_n = 1.0 / static_cast<double>(n);
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double pi = 1.0;
        for (Eigen::Index j = 0; j < d; ++j)
            pi *= u(i, j);
        const double diff = static_cast<double>(count[static_cast<std::size_t>(i)]) * inv_n - pi;
        s += diff * diff;
    }
    return s;
}

} // namespace

double cvm_score(const Sample& sample) {
    if (sample.d() < 2)
        throw DataError("cvm_score: need at least two columns");
    const Eigen::MatrixXd u = pseudo_observations(sample.values).values;
    const auto counts = u.cols() == 2 ? dominance_counts_2d(u) : dominance_counts_nd(u);
    return cvm_from_counts(u, counts);
}

double cvm_score_reference(const Sample& sample) {
    if (sample.d() < 2)
        throw DataError("cvm_score: need at least two columns");
    const Eigen::MatrixXd u = pseudo_observations(sample.values).values;
    return cvm_from_counts(u, dominance_counts_reference(u));
}

Sample sample_empirical(const Sample& points, Eigen::Index n, Rng& rng) {
    require_sample(points.values, "sample_empirical");
    if (n < 1)
        throw DataError("sample_empirical: n must be positive");
    Eigen::MatrixXd out(n, points.d());
    const auto rows = static_cast<std::uint64_t>(points.n());
    for (Eigen::Index i = 0; i < n; ++i)
        out.row(i) = points.values.row(static_cast<Eigen::Index>(rng.below(rows)));
    return Sample{std::move(out)};
}

std::vector<double> cvm_null_scores(Eigen::Index n, int d, int count, const Rng& rng) {
    if (n < 1 || d < 2 || count < 1)
        throw DataError("cvm_null_scores: need n >= 1, d >= 2, count >= 1");
    std::vector<double> scores(static_cast<std::size_t>(count));
    for (int r = 0; r < count; ++r) {
        Rng stream = rng.derive(static_cast<std::uint64_t>(r));
        Eigen::MatrixXd u(n, d);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < d; ++j)
                u(i, j) = stream.uniform_open();
        scores[static_cast<std::size_t>(r)] = cvm_score(Sample{std::move(u)});
    }
    std::sort(scores.begin(), scores.end());
    return scores;
}

} // namespace dcn::empirical
