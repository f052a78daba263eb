#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <optional>
#include <vector>

#include "orbitreg/errors.hpp"

namespace orbitreg {

using ZVec = std::vector<mpz_class>;
using ZMat = std::vector<ZVec>;  // rows
using QVec = std::vector<mpq_class>;
using QMat = std::vector<QVec>;

namespace intlat {

inline bool is_zero_vec(const ZVec& v) {
    for (const auto& x : v)
        if (x != 0) return false;
    return true;
}

// Z-basis of { x in Z^n : A x = 0 }, via column gcd elimination.
// Basis is returned row-HNF reduced by the caller if canonical form matters.
inline ZMat kernel_int(ZMat a) {
    const size_t m = a.size();
    const size_t n = m == 0 ? 0 : a[0].size();
    // U tracks column operations; columns of U are candidate kernel vectors.
    ZMat u(n, ZVec(n, mpz_class(0)));
    for (size_t i = 0; i < n; ++i) u[i][i] = 1;

    auto col_sub = [&](size_t k, size_t j, const mpz_class& q) {
        // col_k -= q * col_j
        for (size_t r = 0; r < m; ++r) a[r][k] -= q * a[r][j];
        for (size_t r = 0; r < n; ++r) u[r][k] -= q * u[r][j];
    };
    auto col_swap = [&](size_t k, size_t j) {
        for (size_t r = 0; r < m; ++r) std::swap(a[r][k], a[r][j]);
        for (size_t r = 0; r < n; ++r) std::swap(u[r][k], u[r][j]);
    };

    size_t c = 0;
    for (size_t r = 0; r < m && c < n; ++r) {
        while (true) {
            size_t best = n;
            for (size_t j = c; j < n; ++j) {
                if (a[r][j] == 0) continue;
                if (best == n || mpz_cmpabs(a[r][j].get_mpz_t(), a[r][best].get_mpz_t()) < 0) best = j;
            }
            if (best == n) break;  // row already clear
            bool others = false;
            for (size_t k = c; k < n; ++k) {
                if (k == best || a[r][k] == 0) continue;
                mpz_class q;
                mpz_tdiv_q(q.get_mpz_t(), a[r][k].get_mpz_t(), a[r][best].get_mpz_t());
                if (q != 0) col_sub(k, best, q);
                if (a[r][k] != 0) others = true;
            }
            if (!others) {
                col_swap(c, best);
                ++c;
                break;
            }
        }
    }
    ZMat kernel;
    for (size_t j = c; j < n; ++j) {
        ZVec v(n);
        for (size_t r = 0; r < n; ++r) v[r] = u[r][j];
        kernel.push_back(std::move(v));
    }
    return kernel;
}

// Row-style Hermite normal form of the lattice generated by the given rows.
// Returns an independent set of rows in echelon form with positive pivots
// and entries above each pivot reduced into [0, pivot).
inline ZMat hnf_rows(ZMat b) {
    const size_t n = b.empty() ? 0 : b[0].size();
    size_t r = 0;
    for (size_t c = 0; c < n && r < b.size(); ++c) {
        while (true) {
            size_t best = b.size();
            for (size_t i = r; i < b.size(); ++i) {
                if (b[i][c] == 0) continue;
                if (best == b.size() || mpz_cmpabs(b[i][c].get_mpz_t(), b[best][c].get_mpz_t()) < 0) best = i;
            }
            if (best == b.size()) goto next_col;
            std::swap(b[r], b[best]);
            {
                bool others = false;
                for (size_t i = r + 1; i < b.size(); ++i) {
                    if (b[i][c] == 0) continue;
                    mpz_class q;
                    mpz_tdiv_q(q.get_mpz_t(), b[i][c].get_mpz_t(), b[r][c].get_mpz_t());
                    for (size_t j = 0; j < n; ++j) b[i][j] -= q * b[r][j];
                    if (b[i][c] != 0) others = true;
                }
                if (!others) break;
            }
        }
        if (b[r][c] < 0)
            for (size_t j = 0; j < n; ++j) b[r][j] = -b[r][j];
        // reduce rows above
        for (size_t i = 0; i < r; ++i) {
            mpz_class q;
            mpz_fdiv_q(q.get_mpz_t(), b[i][c].get_mpz_t(), b[r][c].get_mpz_t());
            if (q != 0)
                for (size_t j = 0; j < n; ++j) b[i][j] -= q * b[r][j];
        }
        ++r;
    next_col:;
    }
    b.resize(r);
    return b;
}

// Clears denominators row by row, then takes the integer kernel.
inline ZMat kernel_rational(const QMat& a) {
    ZMat z;
    z.reserve(a.size());
    for (const auto& row : a) {
        mpz_class l = 1;
        for (const auto& q : row) l = lcm(l, q.get_den());
        ZVec zr;
        zr.reserve(row.size());
        for (const auto& q : row) {
            mpq_class s = q * l;
            zr.push_back(s.get_num());
        }
        z.push_back(std::move(zr));
    }
    return kernel_int(std::move(z));
}

// Rows completing a basis of the saturated sublattice S (given by basis rows)
// to a basis of Z^p.  Diagonalizes with tracked column operations; the
// diagonal must come out as units, which is exactly saturation.
inline ZMat complete_saturated(ZMat a, size_t p) {
    const size_t s = a.size();
    if (s == 0) {
        ZMat c(p, ZVec(p, mpz_class(0)));
        for (size_t i = 0; i < p; ++i) c[i][i] = 1;
        return c;
    }
    ZMat qinv(p, ZVec(p, mpz_class(0)));
    for (size_t i = 0; i < p; ++i) qinv[i][i] = 1;

    auto col_sub = [&](size_t k, size_t j, const mpz_class& q) {
        for (size_t r = 0; r < s; ++r) a[r][k] -= q * a[r][j];
        // a <- a E with E = I - q e_j e_k^T, so qinv <- E^{-1} qinv
        for (size_t c = 0; c < p; ++c) qinv[j][c] += q * qinv[k][c];
    };
    auto col_swap = [&](size_t k, size_t j) {
        for (size_t r = 0; r < s; ++r) std::swap(a[r][k], a[r][j]);
        std::swap(qinv[k], qinv[j]);
    };

    for (size_t t = 0; t < s; ++t) {
        while (true) {
            // row ops (untracked) to clear column below pivot candidates
            size_t br = s, bc = p;
            for (size_t i = t; i < s; ++i)
                for (size_t j = t; j < p; ++j) {
                    if (a[i][j] == 0) continue;
                    if (br == s || mpz_cmpabs(a[i][j].get_mpz_t(), a[br][bc].get_mpz_t()) < 0) { br = i; bc = j; }
                }
            if (br == s) throw ValidationError("complete_saturated: rank-deficient basis");
            std::swap(a[t], a[br]);
            col_swap(t, bc);
            bool dirty = false;
            for (size_t i = t + 1; i < s; ++i) {
                if (a[i][t] == 0) continue;
                mpz_class q;
                mpz_tdiv_q(q.get_mpz_t(), a[i][t].get_mpz_t(), a[t][t].get_mpz_t());
                for (size_t j = t; j < p; ++j) a[i][j] -= q * a[t][j];
                if (a[i][t] != 0) dirty = true;
            }
            for (size_t j = t + 1; j < p; ++j) {
                if (a[t][j] == 0) continue;
                mpz_class q;
                mpz_tdiv_q(q.get_mpz_t(), a[t][j].get_mpz_t(), a[t][t].get_mpz_t());
                if (q != 0) col_sub(j, t, q);
                if (a[t][j] != 0) dirty = true;
            }
            if (!dirty) break;
        }
        if (a[t][t] != 1 && a[t][t] != -1)
            throw ValidationError("complete_saturated: sublattice is not saturated");
    }
    ZMat c;
    for (size_t i = s; i < p; ++i) c.push_back(qinv[i]);
    return c;
}

// Textbook LLL with exact rational Gram-Schmidt.  Rows of b are the basis;
// must be linearly independent.  delta = 99/100.
inline void lll_reduce(ZMat& b) {
    const size_t n = b.size();
    if (n <= 1) return;
    const size_t d = b[0].size();
    const mpq_class delta(99, 100);

    auto dotzz = [&](const ZVec& x, const ZVec& y) {
        mpz_class s = 0;
        for (size_t i = 0; i < d; ++i) s += x[i] * y[i];
        return s;
    };

    QMat mu(n, QVec(n, mpq_class(0)));
    QVec bstar_norm(n, mpq_class(0));

    auto recompute_gs = [&]() {
        // b*_k = b_k - sum_{j<k} mu_kj b*_j ; store b* as rational vectors
        QMat bs(n, QVec(d, mpq_class(0)));
        for (size_t k = 0; k < n; ++k) {
            for (size_t i = 0; i < d; ++i) bs[k][i] = mpq_class(b[k][i]);
            for (size_t j = 0; j < k; ++j) {
                mpq_class num = 0;
                for (size_t i = 0; i < d; ++i) num += mpq_class(b[k][i]) * bs[j][i];
                mu[k][j] = bstar_norm[j] == 0 ? mpq_class(0) : num / bstar_norm[j];
                for (size_t i = 0; i < d; ++i) bs[k][i] -= mu[k][j] * bs[j][i];
            }
            mpq_class nn = 0;
            for (size_t i = 0; i < d; ++i) nn += bs[k][i] * bs[k][i];
            bstar_norm[k] = nn;
        }
    };

    recompute_gs();
    size_t k = 1;
    size_t guard = 0;
    while (k < n) {
        if (++guard > 100000) break;  // degenerate input; bail with partial reduction
        for (size_t j = k; j-- > 0;) {
            mpq_class m = mu[k][j];
            mpz_class r;
            // nearest integer to m
            mpq_class half(1, 2);
            mpq_class shifted = m + half;
            mpz_fdiv_q(r.get_mpz_t(), shifted.get_num().get_mpz_t(), shifted.get_den().get_mpz_t());
            if (r != 0) {
                for (size_t i = 0; i < d; ++i) b[k][i] -= r * b[j][i];
                recompute_gs();
            }
        }
        mpq_class lhs = bstar_norm[k];
        mpq_class rhs = (delta - mu[k][k - 1] * mu[k][k - 1]) * bstar_norm[k - 1];
        if (lhs >= rhs) {
            ++k;
        } else {
            std::swap(b[k], b[k - 1]);
            recompute_gs();
            k = k > 1 ? k - 1 : 1;
        }
    }
    (void)dotzz;
}

}  // namespace intlat
}  // namespace orbitreg
