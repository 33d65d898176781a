#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "restrictlab/common.hpp"
#include "restrictlab/parallel.hpp"

namespace restrictlab::curveconv {

/// Sparse tables over the lattice of (sum n_i, sum n_i^3) reached by b-tuples
/// with entries in [-N, N]. Stored slice-by-slice in the linear sum s; each
/// slice holds (cubic sum, value) pairs sorted by the cubic sum. The value
/// type is a multiplicity (integer counting) or a complex amplitude (weighted
/// exponential-sum moments); the convolution structure is identical.
template <typename V>
struct CurveTable {
    std::int64_t N = 0;
    std::int64_t b = 0;
    std::vector<std::vector<std::pair<std::int64_t, V>>> slices; // index s + b*N

    std::int64_t s_min() const { return -b * N; }
    std::int64_t s_max() const { return b * N; }
    const std::vector<std::pair<std::int64_t, V>>& slice(std::int64_t s) const {
        static const std::vector<std::pair<std::int64_t, V>> empty;
        if (s < s_min() || s > s_max()) return empty;
        return slices[std::size_t(s + b * N)];
    }
    std::size_t entry_count() const {
        std::size_t n = 0;
        for (const auto& sl : slices) n += sl.size();
        return n;
    }
};

/// b = 1 table: one entry (n^3, weight[n+N]) per linear sum n.
template <typename V>
CurveTable<V> single_table(std::int64_t N, const std::vector<V>& weights) {
    CurveTable<V> t;
    t.N = N;
    t.b = 1;
    t.slices.assign(std::size_t(2 * N + 1), {});
    for (std::int64_t n = -N; n <= N; ++n)
        t.slices[std::size_t(n + N)] = {{n * n * n, weights[std::size_t(n + N)]}};
    return t;
}

inline std::vector<std::uint64_t> unit_weights(std::int64_t N) {
    return std::vector<std::uint64_t>(std::size_t(2 * N + 1), 1);
}

namespace detail {

/// Collects one output slice of A * B as raw shifted pairs, then sorts and
/// aggregates equal cubic sums. Good when the slice is much sparser than its
/// dense range.
template <typename V>
void slice_by_sorting(const CurveTable<V>& A, const CurveTable<V>& B, std::int64_t s,
                      std::vector<std::pair<std::int64_t, V>>& out) {
    out.clear();
    for (std::int64_t s1 = std::max(A.s_min(), s - B.s_max());
         s1 <= std::min(A.s_max(), s - B.s_min()); ++s1) {
        const auto& va = A.slice(s1);
        const auto& vb = B.slice(s - s1);
        for (const auto& [c1, m1] : va)
            for (const auto& [c2, m2] : vb)
                out.emplace_back(c1 + c2, m1 * m2);
    }
    std::sort(out.begin(), out.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    std::size_t w = 0;
    for (std::size_t i = 0; i < out.size();) {
        std::int64_t c = out[i].first;
        V acc = out[i].second;
        for (++i; i < out.size() && out[i].first == c; ++i) acc += out[i].second;
        out[w++] = {c, acc};
    }
    out.resize(w);
}

/// Same slice, accumulated into a dense scratch array over the full cubic
/// range. Good when the slice is well filled; scratch is reused per worker.
template <typename V>
void slice_by_dense(const CurveTable<V>& A, const CurveTable<V>& B, std::int64_t s,
                    std::vector<V>& scratch, std::int64_t c_span) {
    std::fill(scratch.begin(), scratch.end(), V{});
    for (std::int64_t s1 = std::max(A.s_min(), s - B.s_max());
         s1 <= std::min(A.s_max(), s - B.s_min()); ++s1) {
        const auto& va = A.slice(s1);
        const auto& vb = B.slice(s - s1);
        for (const auto& [c1, m1] : va) {
            V* base = scratch.data() + (c1 + c_span);
            for (const auto& [c2, m2] : vb) base[c2] += m1 * m2;
        }
    }
}

template <typename V>
std::size_t estimated_slice_pairs(const CurveTable<V>& A, const CurveTable<V>& B, std::int64_t s) {
    std::size_t total = 0;
    for (std::int64_t s1 = std::max(A.s_min(), s - B.s_max());
         s1 <= std::min(A.s_max(), s - B.s_min()); ++s1)
        total += A.slice(s1).size() * B.slice(s - s1).size();
    return total;
}

} // namespace detail

/// Streams the slices of the convolution A * B in increasing s as dense
/// arrays: visitor(s, c_span, values) where values[c + c_span] is the entry
/// at cubic sum c, |c| <= c_span. Runs slices in parallel; the visitor must
/// be safe for concurrent calls on distinct s.
template <typename V, typename Visitor>
void stream_dense_slices(const CurveTable<V>& A, const CurveTable<V>& B, Visitor&& visit,
                         unsigned threads = 0) {
    const std::int64_t b = A.b + B.b;
    const std::int64_t N = A.N;
    const std::int64_t c_span = b * N * N * N;
    const std::int64_t s_span = b * N;
    const std::size_t n_slices = std::size_t(2 * s_span + 1);
    parallel_chunks(n_slices, [&](std::size_t, std::size_t lo, std::size_t hi) {
        std::vector<V> scratch(std::size_t(2 * c_span + 1));
        for (std::size_t i = lo; i < hi; ++i) {
            std::int64_t s = std::int64_t(i) - s_span;
            detail::slice_by_dense(A, B, s, scratch, c_span);
            visit(s, c_span, scratch);
        }
    }, threads, 1);
}

/// Streams the slices of A * B in sparse (sorted, aggregated) form:
/// visitor(s, entries). Parallel across slices like stream_dense_slices.
template <typename V, typename Visitor>
void stream_sparse_slices(const CurveTable<V>& A, const CurveTable<V>& B, Visitor&& visit,
                          unsigned threads = 0) {
    const std::int64_t s_span = A.b * A.N + B.b * B.N;
    const std::size_t n_slices = std::size_t(2 * s_span + 1);
    parallel_chunks(n_slices, [&](std::size_t, std::size_t lo, std::size_t hi) {
        std::vector<std::pair<std::int64_t, V>> entries;
        for (std::size_t i = lo; i < hi; ++i) {
            std::int64_t s = std::int64_t(i) - s_span;
            detail::slice_by_sorting(A, B, s, entries);
            visit(s, entries);
        }
    }, threads, 1);
}

/// Materializes A * B, choosing per slice between the sorting and the dense
/// accumulation path by estimated fill.
template <typename V>
CurveTable<V> convolve(const CurveTable<V>& A, const CurveTable<V>& B, unsigned threads = 0,
                       std::size_t max_dense = (std::size_t(1) << 23)) {
    CurveTable<V> out;
    require(A.N == B.N, "curveconv.width_mismatch", "tables must share N");
    out.N = A.N;
    out.b = A.b + B.b;
    const std::int64_t c_span = out.b * out.N * out.N * out.N;
    const std::int64_t s_span = out.b * out.N;
    const std::size_t n_slices = std::size_t(2 * s_span + 1);
    out.slices.assign(n_slices, {});
    const std::size_t dense_len = std::size_t(2 * c_span + 1);
    parallel_chunks(n_slices, [&](std::size_t, std::size_t lo, std::size_t hi) {
        std::vector<V> scratch;
        for (std::size_t i = lo; i < hi; ++i) {
            std::int64_t s = std::int64_t(i) - s_span;
            std::size_t pairs = detail::estimated_slice_pairs(A, B, s);
            if (dense_len <= max_dense && pairs > dense_len / 16) {
                if (scratch.size() != dense_len) scratch.assign(dense_len, V{});
                detail::slice_by_dense(A, B, s, scratch, c_span);
                auto& sl = out.slices[i];
                for (std::int64_t c = -c_span; c <= c_span; ++c) {
                    const V& v = scratch[std::size_t(c + c_span)];
                    if (!(v == V{})) sl.emplace_back(c, v);
                }
            } else {
                detail::slice_by_sorting(A, B, s, out.slices[i]);
            }
        }
    }, threads, 1);
    return out;
}

/// Builds the b-fold table of a weight vector by repeated convolution with
/// the single-step table (kept simple: these side tables are small).
template <typename V>
CurveTable<V> power_table(std::int64_t N, const std::vector<V>& weights, std::int64_t b,
                          unsigned threads = 0) {
    require(b >= 1, "curveconv.power_domain", "b must be >= 1");
    CurveTable<V> base = single_table(N, weights);
    CurveTable<V> acc = base;
    for (std::int64_t j = 2; j <= b; ++j) acc = convolve(acc, base, threads);
    return acc;
}

} // namespace restrictlab::curveconv
