// Exact arithmetic in F_p, F_p^2 = F_p(sqrt(-Delta)), Z/p^k and Z/p^k[sqrt(-Delta)]
// for an odd prime p inert in K = Q(sqrt(-Delta)), with square-class and
// valuation utilities.  Everything is small-residue, int64-backed and pure.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace heckep {

using i64 = long long;
using i128 = __int128;

struct ArithError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotPrime : ArithError {
    explicit NotPrime(i64 p) : ArithError("not an odd prime: " + std::to_string(p)) {}
};
struct NotInert : ArithError {
    NotInert(i64 p, i64 d)
        : ArithError("p=" + std::to_string(p) + " is not inert for Delta=" + std::to_string(d)) {}
};
struct ZeroInput : ArithError {
    ZeroInput() : ArithError("zero input where a unit is required") {}
};
struct NonUnit : ArithError {
    NonUnit() : ArithError("element is not a unit") {}
};

inline i64 mod_reduce(i64 x, i64 m) {
    i64 r = x % m;
    return r < 0 ? r + m : r;
}

inline i64 mul_mod(i64 a, i64 b, i64 m) { return (i64)((i128)a * b % m); }

inline i64 pow_mod(i64 b, i64 e, i64 m) {
    b = mod_reduce(b, m);
    i64 r = 1 % m;
    while (e > 0) {
        if (e & 1) r = mul_mod(r, b, m);
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    return r;
}

// extended gcd based inverse mod m; throws NonUnit if gcd != 1
inline i64 inv_mod(i64 a, i64 m) {
    a = mod_reduce(a, m);
    i64 g = m, x = 0, x1 = 1, a1 = a;
    while (a1 != 0) {
        i64 q = g / a1;
        g -= q * a1;
        std::swap(g, a1);
        x -= q * x1;
        std::swap(x, x1);
    }
    if (g != 1) throw NonUnit();
    return mod_reduce(x, m);
}

inline bool is_odd_prime(i64 p) {
    if (p < 3 || p % 2 == 0) return false;
    for (i64 d = 3; d * d <= p; d += 2)
        if (p % d == 0) return false;
    return true;
}

enum class SquareClass { Square, NonSquare };

// element of Z/p^k[sqrt(-Delta)], k = 1 or 2; re,im are residues mod p^k
struct Quad {
    i64 re{0}, im{0};
    bool operator==(const Quad&) const = default;
};

// The arithmetic universe (p, Delta, residue systems).  p odd prime,
// (-Delta|p) = -1, residues canonically in {0..p^k-1}.
class FieldContext {
public:
    struct Auto {};

    FieldContext(i64 p, i64 delta) : p_(p), delta_(delta) { validate(); }
    FieldContext(i64 p, Auto) : p_(p), delta_(auto_delta(p)) { validate(); }

    i64 p() const { return p_; }
    i64 p2() const { return p_ * p_; }
    i64 delta() const { return delta_; }
    int k_max() const { return 2; }
    i64 mod(int k) const { return k == 1 ? p_ : p_ * p_; }

    // least Delta >= 1 with (-Delta|p) = -1
    static i64 auto_delta(i64 p) {
        if (!is_odd_prime(p)) throw NotPrime(p);
        for (i64 d = 1; d < p; ++d) {
            if (pow_mod(mod_reduce(-d, p), (p - 1) / 2, p) == p - 1) return d;
        }
        throw NotInert(p, -1);  // unreachable: -x hits a non-residue for some x
    }

    SquareClass square_class(i64 x) const {
        x = mod_reduce(x, p_);
        if (x == 0) throw ZeroInput();
        return pow_mod(x, (p_ - 1) / 2, p_) == 1 ? SquareClass::Square : SquareClass::NonSquare;
    }

    // y with y^2 = x mod p, the smaller of +-y, else nullopt; exhaustive scan
    std::optional<i64> fp_sqrt(i64 x) const {
        x = mod_reduce(x, p_);
        for (i64 y = 0; 2 * y <= p_; ++y)
            if (mul_mod(y, y, p_) == x) return y;
        return std::nullopt;
    }

    // ---- Quad operations at precision k (mod p^k) ----

    Quad qmake(i64 re, i64 im, int k) const {
        i64 m = mod(k);
        return {mod_reduce(re, m), mod_reduce(im, m)};
    }
    Quad qadd(Quad a, Quad b, int k) const {
        i64 m = mod(k);
        return {mod_reduce(a.re + b.re, m), mod_reduce(a.im + b.im, m)};
    }
    Quad qsub(Quad a, Quad b, int k) const {
        i64 m = mod(k);
        return {mod_reduce(a.re - b.re, m), mod_reduce(a.im - b.im, m)};
    }
    Quad qneg(Quad a, int k) const {
        i64 m = mod(k);
        return {mod_reduce(-a.re, m), mod_reduce(-a.im, m)};
    }
    Quad qmul(Quad a, Quad b, int k) const {
        i64 m = mod(k);
        // (a.re + a.im w)(b.re + b.im w), w^2 = -Delta
        i64 re = mod_reduce(mul_mod(a.re, b.re, m) - mul_mod(delta_ % m, mul_mod(a.im, b.im, m), m), m);
        i64 im = mod_reduce(mul_mod(a.re, b.im, m) + mul_mod(a.im, b.re, m), m);
        return {re, im};
    }
    Quad qconj(Quad a, int k) const { return {a.re, mod_reduce(-a.im, mod(k))}; }
    i64 qnorm(Quad a, int k) const {
        i64 m = mod(k);
        return mod_reduce(mul_mod(a.re, a.re, m) + mul_mod(delta_ % m, mul_mod(a.im, a.im, m), m), m);
    }
    bool qis_zero(Quad a) const { return a.re == 0 && a.im == 0; }
    bool qis_unit(Quad a, int k) const {
        (void)k;
        return qnorm(a, 1) % p_ != 0;
    }
    Quad qinv(Quad a, int k) const {
        i64 n = qnorm(a, k);
        if (n % p_ == 0) throw NonUnit();
        i64 ninv = inv_mod(n, mod(k));
        Quad c = qconj(a, k);
        i64 m = mod(k);
        return {mul_mod(c.re, ninv, m), mul_mod(c.im, ninv, m)};
    }
    Quad qreduce(Quad a, int k) const {  // reduction p^2 -> p^k
        i64 m = mod(k);
        return {mod_reduce(a.re, m), mod_reduce(a.im, m)};
    }
    Quad qscale(i64 c, Quad a, int k) const {
        i64 m = mod(k);
        c = mod_reduce(c, m);
        return {mul_mod(c, a.re, m), mul_mod(c, a.im, m)};
    }

private:
    void validate() const {
        if (!is_odd_prime(p_)) throw NotPrime(p_);
        if (delta_ < 1 || delta_ % p_ == 0) throw NotInert(p_, delta_);
        if (pow_mod(mod_reduce(-delta_, p_), (p_ - 1) / 2, p_) != p_ - 1) throw NotInert(p_, delta_);
    }

    i64 p_;
    i64 delta_;
};

// exact scalar mantissa * p^pexp with p t mantissa (normalized) unless zero
struct PexactScalar {
    i64 mantissa{0};
    int pexp{0};

    static PexactScalar make(i64 mant, int e, i64 p) {
        if (mant == 0) return {0, 0};
        while (mant % p == 0) {
            mant /= p;
            ++e;
        }
        return {mant, e};
    }
    bool is_zero() const { return mantissa == 0; }
    // ord_p; only meaningful for nonzero values
    int ord() const {
        if (mantissa == 0) throw ZeroInput();
        return pexp;
    }
};

}  // namespace heckep
