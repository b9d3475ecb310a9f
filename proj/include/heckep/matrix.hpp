// Dense matrices over the small rings of arith.hpp: exact integer matrices,
// matrices over Z/p^k and Z/p^k[sqrt(-Delta)], Howell canonical forms of row
// modules, p-part Smith divisors, Pluecker coordinates and quadratic form
// classification over F_p.

#pragma once

#include <algorithm>
#include <cassert>
#include <functional>
#include <numeric>
#include <vector>

#include "arith.hpp"

namespace heckep {

struct DimensionMismatch : ArithError {
    DimensionMismatch() : ArithError("matrix dimension mismatch") {}
};
struct NonInvertible : ArithError {
    NonInvertible() : ArithError("matrix is not invertible") {}
};
struct RankDeficient : ArithError {
    RankDeficient() : ArithError("matrix does not have the required rank") {}
};
struct NotSymmetric : ArithError {
    NotSymmetric() : ArithError("matrix is not symmetric") {}
};
struct SingularModPk : ArithError {
    SingularModPk() : ArithError("matrix is singular modulo p^k") {}
};

template <class T>
class Mat {
public:
    Mat() : r_(0), c_(0) {}
    Mat(int r, int c) : r_(r), c_(c), a_((size_t)r * c) {}
    Mat(int r, int c, std::vector<T> a) : r_(r), c_(c), a_(std::move(a)) {
        assert((int)a_.size() == r_ * c_);
    }

    int rows() const { return r_; }
    int cols() const { return c_; }
    T& operator()(int i, int j) { return a_[(size_t)i * c_ + j]; }
    const T& operator()(int i, int j) const { return a_[(size_t)i * c_ + j]; }
    const std::vector<T>& data() const { return a_; }
    std::vector<T>& data() { return a_; }

    bool operator==(const Mat&) const = default;

    Mat transpose() const {
        Mat t(c_, r_);
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

private:
    int r_, c_;
    std::vector<T> a_;
};

using ZMat = Mat<i64>;
using QMat = Mat<Quad>;

// ---------------------------------------------------------------- integer ops

inline ZMat zident(int n) {
    ZMat e(n, n);
    for (int i = 0; i < n; ++i) e(i, i) = 1;
    return e;
}

inline ZMat zmul(const ZMat& a, const ZMat& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch();
    ZMat c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            i64 v = a(i, k);
            if (v == 0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += v * b(k, j);
        }
    return c;
}

inline ZMat zadd(const ZMat& a, const ZMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch();
    ZMat c(a.rows(), a.cols());
    for (size_t i = 0; i < a.data().size(); ++i) c.data()[i] = a.data()[i] + b.data()[i];
    return c;
}

inline ZMat zsub(const ZMat& a, const ZMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch();
    ZMat c(a.rows(), a.cols());
    for (size_t i = 0; i < a.data().size(); ++i) c.data()[i] = a.data()[i] - b.data()[i];
    return c;
}

inline ZMat zscale(i64 c, const ZMat& a) {
    ZMat r = a;
    for (auto& x : r.data()) x *= c;
    return r;
}

inline ZMat zmod(const ZMat& a, i64 m) {
    ZMat r = a;
    for (auto& x : r.data()) x = mod_reduce(x, m);
    return r;
}

// exact determinant, fraction-free Gauss (Bareiss) in __int128
inline i128 zdet_exact(const ZMat& a) {
    if (a.rows() != a.cols()) throw DimensionMismatch();
    int n = a.rows();
    std::vector<i128> m((size_t)n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m[(size_t)i * n + j] = a(i, j);
    i128 prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (m[(size_t)k * n + k] == 0) {
            int piv = -1;
            for (int i = k + 1; i < n; ++i)
                if (m[(size_t)i * n + k] != 0) {
                    piv = i;
                    break;
                }
            if (piv < 0) return 0;
            for (int j = 0; j < n; ++j) std::swap(m[(size_t)k * n + j], m[(size_t)piv * n + j]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) {
                m[(size_t)i * n + j] =
                    (m[(size_t)k * n + k] * m[(size_t)i * n + j] - m[(size_t)i * n + k] * m[(size_t)k * n + j]) / prev;
            }
        prev = m[(size_t)k * n + k];
    }
    return sign * m[(size_t)(n - 1) * n + (n - 1)];
}

inline int ord_p_i128(i128 v, i64 p) {
    assert(v != 0);
    int e = 0;
    while (v % p == 0) {
        v /= p;
        ++e;
    }
    return e;
}

// adjugate, exact (cofactor determinants fit i64 for our sizes; asserted)
inline ZMat zadjugate(const ZMat& a) {
    int n = a.rows();
    if (n != a.cols()) throw DimensionMismatch();
    ZMat adj(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            ZMat minor(n - 1, n - 1);
            for (int r = 0, rr = 0; r < n; ++r) {
                if (r == i) continue;
                for (int c = 0, cc = 0; c < n; ++c) {
                    if (c == j) continue;
                    minor(rr, cc) = a(r, c);
                    ++cc;
                }
                ++rr;
            }
            i128 d = (n == 1) ? 1 : zdet_exact(minor);
            i128 v = ((i + j) % 2 == 0) ? d : -d;
            assert(v <= INT64_MAX && v >= INT64_MIN);
            adj(j, i) = (i64)v;
        }
    return adj;
}

inline int rank_fp(ZMat a, i64 p) {
    a = zmod(a, p);
    int rank = 0;
    int n = a.rows(), m = a.cols();
    for (int col = 0; col < m && rank < n; ++col) {
        int piv = -1;
        for (int i = rank; i < n; ++i)
            if (a(i, col) % p != 0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        for (int j = 0; j < m; ++j) std::swap(a(rank, j), a(piv, j));
        i64 inv = inv_mod(a(rank, col), p);
        for (int j = 0; j < m; ++j) a(rank, j) = mul_mod(a(rank, j), inv, p);
        for (int i = 0; i < n; ++i) {
            if (i == rank || a(i, col) == 0) continue;
            i64 f = a(i, col);
            for (int j = 0; j < m; ++j) a(i, j) = mod_reduce(a(i, j) - f * a(rank, j), p);
        }
        ++rank;
    }
    return rank;
}

// basis of the right kernel {x : a x = 0} over F_p, returned as rows
inline ZMat kernel_fp(ZMat a, i64 p) {
    a = zmod(a, p);
    int n = a.rows(), m = a.cols();
    std::vector<int> pivot_col;
    int rank = 0;
    for (int col = 0; col < m && rank < n; ++col) {
        int piv = -1;
        for (int i = rank; i < n; ++i)
            if (a(i, col) % p != 0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        for (int j = 0; j < m; ++j) std::swap(a(rank, j), a(piv, j));
        i64 inv = inv_mod(a(rank, col), p);
        for (int j = 0; j < m; ++j) a(rank, j) = mul_mod(a(rank, j), inv, p);
        for (int i = 0; i < n; ++i) {
            if (i == rank || a(i, col) == 0) continue;
            i64 f = a(i, col);
            for (int j = 0; j < m; ++j) a(i, j) = mod_reduce(a(i, j) - f * a(rank, j), p);
        }
        pivot_col.push_back(col);
        ++rank;
    }
    std::vector<bool> is_pivot(m, false);
    for (int c : pivot_col) is_pivot[c] = true;
    ZMat ker(m - rank, m);
    int kr = 0;
    for (int free = 0; free < m; ++free) {
        if (is_pivot[free]) continue;
        ker(kr, free) = 1;
        for (int r = 0; r < rank; ++r) ker(kr, pivot_col[r]) = mod_reduce(-a(r, free), p);
        ++kr;
    }
    return ker;
}

// inverse over Z/p^k via integer-lift adjugate; "unit" means det != 0 mod p
inline ZMat zinv_mod(const ZMat& a, i64 p, int k) {
    i64 m = 1;
    for (int i = 0; i < k; ++i) m *= p;
    ZMat ar = zmod(a, m);
    i128 d = zdet_exact(ar);
    i64 dm = mod_reduce((i64)(d % m), m);
    if (dm % p == 0) throw NonInvertible();
    ZMat adj = zadjugate(ar);
    i64 dinv = inv_mod(dm, m);
    ZMat r(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r(i, j) = mul_mod(mod_reduce(adj(i, j), m), dinv, m);
    return r;
}

// --------------------------------------------------------------- Howell form

// Canonical generator matrix of the row module of `a` inside (Z/p^K)^cols.
// Unique per module: left multiplication by any unit matrix over Z/p^K (in
// particular by reductions of GSp(Z_p) elements of matching similitude) does
// not change it.  Zero rows are dropped.
inline ZMat howell_form(const ZMat& a, i64 p, int K) {
    i64 m = 1;
    for (int i = 0; i < K; ++i) m *= p;
    int n = a.cols();
    std::vector<std::vector<i64>> rows;
    for (int i = 0; i < a.rows(); ++i) {
        std::vector<i64> r(n);
        bool nz = false;
        for (int j = 0; j < n; ++j) {
            r[j] = mod_reduce(a(i, j), m);
            nz |= r[j] != 0;
        }
        if (nz) rows.push_back(std::move(r));
    }

    auto vord = [&](i64 x) {
        int e = 0;
        while (x % p == 0 && e < K) {
            x /= p;
            ++e;
        }
        return e;  // K for x == 0
    };

    std::vector<std::vector<i64>> done;  // echelon rows, pivot cols increasing
    std::vector<int> pivcol, pivord;
    for (int col = 0; col < n; ++col) {
        // select the row with minimal valuation in this column
        int best = -1, bestv = K;
        for (size_t i = 0; i < rows.size(); ++i) {
            int v = rows[i][col] == 0 ? K : vord(rows[i][col]);
            if (v < bestv) {
                bestv = v;
                best = (int)i;
            }
        }
        if (best < 0 || bestv == K) continue;
        std::vector<i64> piv = rows[best];
        rows.erase(rows.begin() + best);
        // normalize: leading entry becomes exactly p^bestv
        i64 unit = piv[col];
        for (int e = 0; e < bestv; ++e) unit /= p;
        i64 uinv = inv_mod(unit, m);
        for (auto& x : piv) x = mul_mod(x, uinv, m);
        i64 lead = 1;
        for (int e = 0; e < bestv; ++e) lead *= p;
        piv[col] = lead;
        // eliminate this column from remaining rows
        for (auto& r : rows) {
            if (r[col] == 0) continue;
            i64 q = r[col] / lead;  // valuation of r[col] >= bestv
            for (int j = 0; j < n; ++j) r[j] = mod_reduce(r[j] - q * piv[j], m);
        }
        // Howell completion: the p^(K-v) multiple generates new content
        if (bestv > 0) {
            i64 f = m / lead;
            std::vector<i64> extra(n);
            bool nz = false;
            for (int j = 0; j < n; ++j) {
                extra[j] = mul_mod(f, piv[j], m);
                nz |= extra[j] != 0;
            }
            if (nz) rows.push_back(std::move(extra));
        }
        done.push_back(std::move(piv));
        pivcol.push_back(col);
        pivord.push_back(bestv);
        // drop rows that became zero
        rows.erase(std::remove_if(rows.begin(), rows.end(),
                                  [](const std::vector<i64>& r) {
                                      return std::all_of(r.begin(), r.end(), [](i64 x) { return x == 0; });
                                  }),
                   rows.end());
    }
    // reduce entries above each pivot modulo the pivot value
    for (size_t r = 0; r < done.size(); ++r) {
        i64 lead = 1;
        for (int e = 0; e < pivord[r]; ++e) lead *= p;
        for (size_t up = 0; up < r; ++up) {
            i64 q = done[up][pivcol[r]] / lead;
            if (q == 0) continue;
            for (int j = 0; j < n; ++j) done[up][j] = mod_reduce(done[up][j] - q * done[r][j], m);
        }
    }
    ZMat h((int)done.size(), n);
    for (size_t i = 0; i < done.size(); ++i)
        for (int j = 0; j < n; ++j) h((int)i, j) = done[i][j];
    return h;
}

// hermite_coset_form: canonical representative data of the left GSp(Z_p)-orbit
// of an integral similitude matrix at precision p^k.  Requires p^k Z^n to be
// contained in the row lattice (true when every elementary divisor divides
// p^k), which holds with k=1 for lambda=p cosets and k=2 for lambda=p^2 ones.
inline ZMat hermite_coset_form(const ZMat& a, i64 p, int k) {
    if (a.rows() == a.cols() && zdet_exact(a) == 0) throw SingularModPk();
    // the row module mod p^k determines the coset: p^k Z^n sits inside the lattice
    return howell_form(a, p, k);
}

// ------------------------------------------------------------ Smith p-part

// valuations of the p-part elementary divisors d_1 | d_2 | ... via gcds of
// k x k minors; requires a square nonsingular integer matrix
inline std::vector<int> smith_p_divisors(const ZMat& a, i64 p) {
    int n = a.rows();
    if (n != a.cols()) throw DimensionMismatch();
    std::vector<int> dk(n + 1, 0);  // dk[r] = ord_p gcd of r x r minors
    for (int r = 1; r <= n; ++r) {
        int best = INT32_MAX;
        std::vector<int> rowsel(r);
        std::iota(rowsel.begin(), rowsel.end(), 0);
        auto next_comb = [&](std::vector<int>& c) {
            int k = r - 1;
            while (k >= 0 && c[k] == n - r + k) --k;
            if (k < 0) return false;
            ++c[k];
            for (int j = k + 1; j < r; ++j) c[j] = c[j - 1] + 1;
            return true;
        };
        do {
            std::vector<int> colsel(r);
            std::iota(colsel.begin(), colsel.end(), 0);
            do {
                ZMat sub(r, r);
                for (int i = 0; i < r; ++i)
                    for (int j = 0; j < r; ++j) sub(i, j) = a(rowsel[i], colsel[j]);
                i128 det = zdet_exact(sub);
                if (det != 0) best = std::min(best, ord_p_i128(det, p));
                if (best == 0) break;
            } while (next_comb(colsel));
            if (best == 0) break;
        } while (next_comb(rowsel));
        if (best == INT32_MAX) throw NonInvertible();  // all r-minors vanish
        dk[r] = best;
    }
    std::vector<int> div(n);
    for (int r = 1; r <= n; ++r) div[r - 1] = dk[r] - dk[r - 1];
    return div;
}

// ---------------------------------------------------------------- Pluecker

// all g x g minors of a g x 2g matrix over F_p in lexicographic column-subset
// order, scaled so the first nonzero coordinate is 1
inline std::vector<i64> pluecker(const ZMat& basis, i64 p) {
    int g = basis.rows(), n = basis.cols();
    if (rank_fp(basis, p) != g) throw RankDeficient();
    std::vector<i64> coords;
    std::vector<int> sel(g);
    std::iota(sel.begin(), sel.end(), 0);
    auto next_comb = [&](std::vector<int>& c) {
        int k = g - 1;
        while (k >= 0 && c[k] == n - g + k) --k;
        if (k < 0) return false;
        ++c[k];
        for (int j = k + 1; j < g; ++j) c[j] = c[j - 1] + 1;
        return true;
    };
    do {
        ZMat sub(g, g);
        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j) sub(i, j) = basis(i, sel[j]);
        coords.push_back(mod_reduce((i64)(zdet_exact(sub) % p), p));
    } while (next_comb(sel));
    i64 lead = 0;
    for (i64 c : coords)
        if (c != 0) {
            lead = c;
            break;
        }
    assert(lead != 0);
    i64 inv = inv_mod(lead, p);
    for (auto& c : coords) c = mul_mod(c, inv, p);
    return coords;
}

// ------------------------------------------------------ quadratic form class

struct QFormClass {
    int rank{0};
    std::optional<SquareClass> disc_class;  // nullopt = NotApplicable
    bool operator==(const QFormClass&) const = default;
};

// rank and discriminant square-class of the nondegenerate part of a symmetric
// matrix over F_p; with up_to_scalar, odd-rank forms lose the class (scaling
// is transitive on classes there) while even-rank forms keep it
inline QFormClass qform_class(const ZMat& sym, const FieldContext& ctx, bool up_to_scalar) {
    i64 p = ctx.p();
    int n = sym.rows();
    if (n != sym.cols()) throw DimensionMismatch();
    ZMat a = zmod(sym, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (a(i, j) != a(j, i)) throw NotSymmetric();

    // symmetric diagonalization by congruence (char != 2)
    std::vector<i64> diag;
    std::vector<int> active(n);
    std::iota(active.begin(), active.end(), 0);
    while (!active.empty()) {
        int k = -1;
        for (int i : active)
            if (a(i, i) != 0) {
                k = i;
                break;
            }
        if (k < 0) {
            // look for an off-diagonal entry and fold it onto the diagonal
            int bi = -1, bj = -1;
            for (int i : active) {
                for (int j : active)
                    if (i != j && a(i, j) != 0) {
                        bi = i;
                        bj = j;
                        break;
                    }
                if (bi >= 0) break;
            }
            if (bi < 0) break;  // all-zero block
            for (int t = 0; t < n; ++t) a(bi, t) = mod_reduce(a(bi, t) + a(bj, t), p);
            for (int t = 0; t < n; ++t) a(t, bi) = mod_reduce(a(t, bi) + a(t, bj), p);
            continue;
        }
        i64 pivot = a(k, k);
        i64 pinv = inv_mod(pivot, p);
        for (int i : active) {
            if (i == k || a(i, k) == 0) continue;
            i64 f = mul_mod(a(i, k), pinv, p);
            for (int t = 0; t < n; ++t) a(i, t) = mod_reduce(a(i, t) - f * a(k, t), p);
            for (int t = 0; t < n; ++t) a(t, i) = mod_reduce(a(t, i) - f * a(t, k), p);
        }
        diag.push_back(pivot);
        active.erase(std::find(active.begin(), active.end(), k));
    }

    QFormClass cls;
    cls.rank = (int)diag.size();
    if (cls.rank == 0) return cls;
    i64 disc = 1;
    for (i64 d : diag) disc = mul_mod(disc, d, p);
    if (up_to_scalar && cls.rank % 2 == 1)
        cls.disc_class = std::nullopt;
    else
        cls.disc_class = ctx.square_class(disc);
    return cls;
}

// ----------------------------------------------------------- Quad matrices

inline QMat qm_from_z(const ZMat& a, const FieldContext& ctx, int k) {
    QMat r(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r(i, j) = ctx.qmake(a(i, j), 0, k);
    return r;
}

inline QMat qm_make(const ZMat& re, const ZMat& im, const FieldContext& ctx, int k) {
    if (re.rows() != im.rows() || re.cols() != im.cols()) throw DimensionMismatch();
    QMat r(re.rows(), re.cols());
    for (int i = 0; i < re.rows(); ++i)
        for (int j = 0; j < re.cols(); ++j) r(i, j) = ctx.qmake(re(i, j), im(i, j), k);
    return r;
}

inline ZMat qm_re(const QMat& a) {
    ZMat r(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r(i, j) = a(i, j).re;
    return r;
}

inline ZMat qm_im(const QMat& a) {
    ZMat r(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r(i, j) = a(i, j).im;
    return r;
}

inline bool qm_is_real(const QMat& a) {
    for (const auto& x : a.data())
        if (x.im != 0) return false;
    return true;
}

inline QMat qm_ident(int n, const FieldContext& ctx, int k) { return qm_from_z(zident(n), ctx, k); }

inline QMat qm_mul(const QMat& a, const QMat& b, const FieldContext& ctx, int k) {
    if (a.cols() != b.rows()) throw DimensionMismatch();
    QMat c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int t = 0; t < a.cols(); ++t) {
            Quad v = a(i, t);
            if (ctx.qis_zero(v)) continue;
            for (int j = 0; j < b.cols(); ++j)
                c(i, j) = ctx.qadd(c(i, j), ctx.qmul(v, b(t, j), k), k);
        }
    return c;
}

inline QMat qm_add(const QMat& a, const QMat& b, const FieldContext& ctx, int k) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch();
    QMat c(a.rows(), a.cols());
    for (size_t i = 0; i < a.data().size(); ++i) c.data()[i] = ctx.qadd(a.data()[i], b.data()[i], k);
    return c;
}

inline QMat qm_sub(const QMat& a, const QMat& b, const FieldContext& ctx, int k) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch();
    QMat c(a.rows(), a.cols());
    for (size_t i = 0; i < a.data().size(); ++i) c.data()[i] = ctx.qsub(a.data()[i], b.data()[i], k);
    return c;
}

inline QMat qm_conj(const QMat& a, const FieldContext& ctx, int k) {
    QMat c = a;
    for (auto& x : c.data()) x = ctx.qconj(x, k);
    return c;
}

inline QMat qm_scale(Quad s, const QMat& a, const FieldContext& ctx, int k) {
    QMat c = a;
    for (auto& x : c.data()) x = ctx.qmul(s, x, k);
    return c;
}

inline QMat qm_reduce(const QMat& a, const FieldContext& ctx, int k) {
    QMat c = a;
    for (auto& x : c.data()) x = ctx.qreduce(x, k);
    return c;
}

// determinant by cofactor recursion with column-subset memoization; valid in
// any commutative ring, sizes here are <= 6
inline Quad qm_det(const QMat& a, const FieldContext& ctx, int k) {
    int n = a.rows();
    if (n != a.cols()) throw DimensionMismatch();
    if (n == 0) return ctx.qmake(1, 0, k);
    std::vector<Quad> memo((size_t)1 << n, Quad{0, 0});
    std::vector<bool> seen((size_t)1 << n, false);
    std::function<Quad(unsigned)> rec = [&](unsigned colmask) -> Quad {
        int row = __builtin_popcount(colmask);
        if (row == n) return ctx.qmake(1, 0, k);
        if (seen[colmask]) return memo[colmask];
        Quad acc{0, 0};
        int pos = 0;  // cofactor sign counts remaining columns only
        for (int j = 0; j < n; ++j) {
            if (colmask & (1u << j)) continue;
            if (!ctx.qis_zero(a(row, j))) {
                Quad sub = rec(colmask | (1u << j));
                Quad term = ctx.qmul(a(row, j), sub, k);
                acc = pos % 2 == 0 ? ctx.qadd(acc, term, k) : ctx.qsub(acc, term, k);
            }
            ++pos;
        }
        seen[colmask] = true;
        memo[colmask] = acc;
        return acc;
    };
    return rec(0);
}

// inverse over the local ring Z/p^k[sqrt(-Delta)]; needs det a unit mod p
inline QMat qm_inv(const QMat& a, const FieldContext& ctx, int k) {
    int n = a.rows();
    if (n != a.cols()) throw DimensionMismatch();
    QMat m = a;
    QMat inv = qm_ident(n, ctx, k);
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int i = col; i < n; ++i)
            if (ctx.qis_unit(m(i, col), k)) {
                piv = i;
                break;
            }
        if (piv < 0) throw NonInvertible();
        if (piv != col)
            for (int j = 0; j < n; ++j) {
                std::swap(m(col, j), m(piv, j));
                std::swap(inv(col, j), inv(piv, j));
            }
        Quad pi = ctx.qinv(m(col, col), k);
        for (int j = 0; j < n; ++j) {
            m(col, j) = ctx.qmul(pi, m(col, j), k);
            inv(col, j) = ctx.qmul(pi, inv(col, j), k);
        }
        for (int i = 0; i < n; ++i) {
            if (i == col || ctx.qis_zero(m(i, col))) continue;
            Quad f = m(i, col);
            for (int j = 0; j < n; ++j) {
                m(i, j) = ctx.qsub(m(i, j), ctx.qmul(f, m(col, j), k), k);
                inv(i, j) = ctx.qsub(inv(i, j), ctx.qmul(f, inv(col, j), k), k);
            }
        }
    }
    return inv;
}

// particular solution of A x = b over F_p, or nullopt if inconsistent
inline std::optional<ZMat> solve_fp(ZMat a, ZMat b, i64 p) {
    if (a.rows() != b.rows() || b.cols() != 1) throw DimensionMismatch();
    int n = a.rows(), m = a.cols();
    a = zmod(a, p);
    b = zmod(b, p);
    std::vector<int> pivot_col;
    int rank = 0;
    for (int col = 0; col < m && rank < n; ++col) {
        int piv = -1;
        for (int i = rank; i < n; ++i)
            if (a(i, col) % p != 0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        for (int j = 0; j < m; ++j) std::swap(a(rank, j), a(piv, j));
        std::swap(b(rank, 0), b(piv, 0));
        i64 inv = inv_mod(a(rank, col), p);
        for (int j = 0; j < m; ++j) a(rank, j) = mul_mod(a(rank, j), inv, p);
        b(rank, 0) = mul_mod(b(rank, 0), inv, p);
        for (int i = 0; i < n; ++i) {
            if (i == rank || a(i, col) == 0) continue;
            i64 f = a(i, col);
            for (int j = 0; j < m; ++j) a(i, j) = mod_reduce(a(i, j) - f * a(rank, j), p);
            b(i, 0) = mod_reduce(b(i, 0) - f * b(rank, 0), p);
        }
        pivot_col.push_back(col);
        ++rank;
    }
    for (int i = rank; i < n; ++i)
        if (b(i, 0) != 0) return std::nullopt;
    ZMat x(m, 1);
    for (int r = 0; r < rank; ++r) x(pivot_col[r], 0) = b(r, 0);
    return x;
}

// kernel of {x : A x = 0 mod p^K} as generator rows with their p-orders,
// computed by Smith elimination over Z/p^K with column-transform tracking
struct KernelModPk {
    ZMat gens;                // rows generate the solution module in (Z/p^K)^m
    std::vector<int> order;   // gens[i] has additive order p^{order[i]}
};

inline KernelModPk kernel_mod_pk(const ZMat& a, i64 p, int K) {
    i64 pk = 1;
    for (int t = 0; t < K; ++t) pk *= p;
    int n = a.rows(), m = a.cols();
    std::vector<std::vector<i64>> w(n, std::vector<i64>(m));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) w[i][j] = mod_reduce(a(i, j), pk);
    // column transforms applied to the identity: x = V y, kernel read off y
    std::vector<std::vector<i64>> V(m, std::vector<i64>(m));
    for (int j = 0; j < m; ++j) V[j][j] = 1;
    auto vord = [&](i64 x) {
        if (x == 0) return K;
        int e = 0;
        while (x % p == 0) {
            x /= p;
            ++e;
        }
        return e;
    };
    int step = 0;
    std::vector<int> diag_ord;
    while (step < std::min(n, m)) {
        int bi = -1, bj = -1, bv = K;
        for (int i = step; i < n; ++i)
            for (int j = step; j < m; ++j) {
                int v = vord(w[i][j]);
                if (v < bv) {
                    bv = v;
                    bi = i;
                    bj = j;
                }
            }
        if (bv == K) break;  // remaining block is zero
        std::swap(w[step], w[bi]);
        for (int i = 0; i < n; ++i) std::swap(w[i][step], w[i][bj]);
        for (int r = 0; r < m; ++r) std::swap(V[r][step], V[r][bj]);
        // normalize pivot to p^bv
        i64 unit = w[step][step];
        for (int t = 0; t < bv; ++t) unit /= p;
        i64 uinv = inv_mod(unit, pk);
        for (int i = 0; i < n; ++i) w[i][step] = mul_mod(w[i][step], uinv, pk);
        for (int r = 0; r < m; ++r) V[r][step] = mul_mod(V[r][step], uinv, pk);
        i64 piv = w[step][step];
        // clear the pivot row (column ops, mirrored on V) and column (row ops)
        for (int j = step + 1; j < m; ++j) {
            if (w[step][j] == 0) continue;
            i64 q = w[step][j] / piv;  // valuations are >= bv
            for (int i = 0; i < n; ++i) w[i][j] = mod_reduce(w[i][j] - q * w[i][step], pk);
            for (int r = 0; r < m; ++r) V[r][j] = mod_reduce(V[r][j] - q * V[r][step], pk);
        }
        for (int i = step + 1; i < n; ++i) {
            if (w[i][step] == 0) continue;
            i64 q = w[i][step] / piv;
            for (int j = 0; j < m; ++j) w[i][j] = mod_reduce(w[i][j] - q * w[step][j], pk);
        }
        diag_ord.push_back(bv);
        ++step;
    }
    KernelModPk out;
    std::vector<std::pair<std::vector<i64>, int>> gens;
    for (int j = 0; j < m; ++j) {
        int aj = j < (int)diag_ord.size() ? diag_ord[j] : K;
        if (aj == 0) continue;  // p^K kills it entirely: no contribution
        i64 scale = 1;
        for (int t = 0; t < K - aj; ++t) scale *= p;
        std::vector<i64> gen(m);
        bool nz = false;
        for (int r = 0; r < m; ++r) {
            gen[r] = mul_mod(scale, V[r][j], pk);
            nz |= gen[r] != 0;
        }
        if (nz) gens.push_back({std::move(gen), aj});
    }
    out.gens = ZMat((int)gens.size(), m);
    out.order.resize(gens.size());
    for (size_t i = 0; i < gens.size(); ++i) {
        for (int r = 0; r < m; ++r) out.gens((int)i, r) = gens[i].first[r];
        out.order[i] = gens[i].second;
    }
    return out;
}

// generators of {x in (Z/p^2)^m : A x = 0 mod p^2}: the mod-p kernel vectors
// that lift, plus p times the remaining mod-p kernel
struct ModuleGens {
    ZMat unit_gens;  // rows: generators of order p^2
    ZMat p_gens;     // rows: generators of order p (already scaled by p)
};

inline ModuleGens kernel_mod_p2(const ZMat& a, i64 p) {
    auto k = kernel_mod_pk(a, p, 2);
    int units = 0, ps = 0;
    for (int o : k.order) (o == 2 ? units : ps)++;
    ModuleGens gens;
    gens.unit_gens = ZMat(units, a.cols());
    gens.p_gens = ZMat(ps, a.cols());
    int iu = 0, ip = 0;
    for (int i = 0; i < k.gens.rows(); ++i) {
        ZMat& dst = k.order[i] == 2 ? gens.unit_gens : gens.p_gens;
        int& idx = k.order[i] == 2 ? iu : ip;
        for (int c = 0; c < a.cols(); ++c) dst(idx, c) = k.gens(i, c);
        ++idx;
    }
    return gens;
}

// rank over the field F_p^2 (k = 1 only)
inline int qm_rank(QMat a, const FieldContext& ctx) {
    const int k = 1;
    int n = a.rows(), m = a.cols();
    int rank = 0;
    for (int col = 0; col < m && rank < n; ++col) {
        int piv = -1;
        for (int i = rank; i < n; ++i)
            if (!ctx.qis_zero(ctx.qreduce(a(i, col), 1))) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        for (int j = 0; j < m; ++j) std::swap(a(rank, j), a(piv, j));
        Quad inv = ctx.qinv(a(rank, col), k);
        for (int j = 0; j < m; ++j) a(rank, j) = ctx.qmul(inv, a(rank, j), k);
        for (int i = 0; i < n; ++i) {
            if (i == rank || ctx.qis_zero(a(i, col))) continue;
            Quad f = a(i, col);
            for (int j = 0; j < m; ++j) a(i, j) = ctx.qsub(a(i, j), ctx.qmul(f, a(rank, j), k), k);
        }
        ++rank;
    }
    return rank;
}

}  // namespace heckep
