#include "imdsec/crypto/ecp192.hpp"

#include <cstring>

namespace imdsec::crypto::p192 {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

// 192-bit little-endian limbs.
struct U192 {
    u64 w[3] = {0, 0, 0};

    bool operator==(const U192& o) const {
        return w[0] == o.w[0] && w[1] == o.w[1] && w[2] == o.w[2];
    }
    bool is_zero() const { return w[0] == 0 && w[1] == 0 && w[2] == 0; }
    bool bit(int i) const { return (w[i / 64] >> (i % 64)) & 1; }
    bool is_odd() const { return w[0] & 1; }
};

struct U384 {
    u64 w[6] = {0, 0, 0, 0, 0, 0};
};

const U192 kP = {{0xffffffffffffffffULL, 0xfffffffffffffffeULL, 0xffffffffffffffffULL}};
const U192 kOrder = {{0x146bc9b1b4d22831ULL, 0xffffffff99def836ULL, 0xffffffffffffffffULL}};
const U192 kB = {{0xfeb8deecc146b9b1ULL, 0x0fa7e9ab72243049ULL, 0x64210519e59c80e7ULL}};
const U192 kGx = {{0xf4ff0afd82ff1012ULL, 0x7cbf20eb43a18800ULL, 0x188da80eb03090f6ULL}};
const U192 kGy = {{0x73f977a11e794811ULL, 0x631011ed6b24cdd5ULL, 0x07192b95ffc8da78ULL}};

int cmp(const U192& a, const U192& b) {
    for (int i = 2; i >= 0; --i) {
        if (a.w[i] < b.w[i]) return -1;
        if (a.w[i] > b.w[i]) return 1;
    }
    return 0;
}

// Returns carry.
u64 add_raw(U192& r, const U192& a, const U192& b) {
    u128 c = 0;
    for (int i = 0; i < 3; ++i) {
        c += static_cast<u128>(a.w[i]) + b.w[i];
        r.w[i] = static_cast<u64>(c);
        c >>= 64;
    }
    return static_cast<u64>(c);
}

// Returns borrow.
u64 sub_raw(U192& r, const U192& a, const U192& b) {
    u128 borrow = 0;
    for (int i = 0; i < 3; ++i) {
        u128 d = static_cast<u128>(a.w[i]) - b.w[i] - borrow;
        r.w[i] = static_cast<u64>(d);
        borrow = (d >> 64) & 1;
    }
    return static_cast<u64>(borrow);
}

U192 add_mod(const U192& a, const U192& b, const U192& m) {
    U192 r;
    u64 carry = add_raw(r, a, b);
    if (carry || cmp(r, m) >= 0) sub_raw(r, r, m);
    return r;
}

U192 sub_mod(const U192& a, const U192& b, const U192& m) {
    U192 r;
    if (sub_raw(r, a, b)) add_raw(r, r, m);
    return r;
}

U384 mul_full(const U192& a, const U192& b) {
    U384 r;
    for (int i = 0; i < 3; ++i) {
        u128 carry = 0;
        for (int j = 0; j < 3; ++j) {
            u128 t = static_cast<u128>(a.w[i]) * b.w[j] + r.w[i + j] + carry;
            r.w[i + j] = static_cast<u64>(t);
            carry = t >> 64;
        }
        r.w[i + 3] = static_cast<u64>(carry);
    }
    return r;
}

// Fast reduction mod p192 = 2^192 - 2^64 - 1 (NIST routine, 64-bit limbs).
U192 reduce_p(const U384& c) {
    U192 s1 = {{c.w[0], c.w[1], c.w[2]}};
    U192 s2 = {{c.w[3], c.w[3], 0}};
    U192 s3 = {{0, c.w[4], c.w[4]}};
    U192 s4 = {{c.w[5], c.w[5], c.w[5]}};

    U192 r;
    u64 carry = add_raw(r, s1, s2);
    carry += add_raw(r, r, s3);
    carry += add_raw(r, r, s4);
    // Fold carries: carry * 2^192 == carry * (2^64 + 1) mod p.
    while (carry) {
        U192 fold = {{carry, carry, 0}};
        carry = add_raw(r, r, fold);
    }
    while (cmp(r, kP) >= 0) sub_raw(r, r, kP);
    return r;
}

// Generic shift-subtract reduction; used for mod-n arithmetic.
U192 reduce_generic(const U384& c, const U192& m) {
    U192 r;
    for (int i = 383; i >= 0; --i) {
        // r = r*2 + bit(i)
        u64 top = r.w[2] >> 63;
        r.w[2] = (r.w[2] << 1) | (r.w[1] >> 63);
        r.w[1] = (r.w[1] << 1) | (r.w[0] >> 63);
        r.w[0] = (r.w[0] << 1) | ((c.w[i / 64] >> (i % 64)) & 1);
        if (top || cmp(r, m) >= 0) sub_raw(r, r, m);
    }
    return r;
}

U192 mul_mod_p(const U192& a, const U192& b) { return reduce_p(mul_full(a, b)); }
U192 mul_mod(const U192& a, const U192& b, const U192& m) {
    return reduce_generic(mul_full(a, b), m);
}

// Binary extended GCD inverse, odd modulus.
U192 inv_mod(const U192& a, const U192& m) {
    auto half_mod = [&](U192& x) {
        u64 carry = 0;
        if (x.is_odd()) carry = add_raw(x, x, m);
        x.w[0] = (x.w[0] >> 1) | (x.w[1] << 63);
        x.w[1] = (x.w[1] >> 1) | (x.w[2] << 63);
        x.w[2] = (x.w[2] >> 1) | (carry << 63);
    };

    U192 u = a, v = m;
    U192 x1 = {{1, 0, 0}}, x2 = {{0, 0, 0}};
    while (!u.is_zero() && !(u.w[0] == 1 && u.w[1] == 0 && u.w[2] == 0) &&
           !(v.w[0] == 1 && v.w[1] == 0 && v.w[2] == 0)) {
        while (!u.is_odd() && !u.is_zero()) {
            u.w[0] = (u.w[0] >> 1) | (u.w[1] << 63);
            u.w[1] = (u.w[1] >> 1) | (u.w[2] << 63);
            u.w[2] >>= 1;
            half_mod(x1);
        }
        while (!v.is_odd() && !v.is_zero()) {
            v.w[0] = (v.w[0] >> 1) | (v.w[1] << 63);
            v.w[1] = (v.w[1] >> 1) | (v.w[2] << 63);
            v.w[2] >>= 1;
            half_mod(x2);
        }
        if (cmp(u, v) >= 0) {
            sub_raw(u, u, v);
            x1 = sub_mod(x1, x2, m);
        } else {
            sub_raw(v, v, u);
            x2 = sub_mod(x2, x1, m);
        }
    }
    if (u.w[0] == 1 && u.w[1] == 0 && u.w[2] == 0) return x1;
    return x2;
}

struct JacobianPoint {
    U192 x, y, z;  // z == 0 -> point at infinity
    bool infinity() const { return z.is_zero(); }
};

struct AffinePoint {
    U192 x, y;
    bool infinity = true;
};

JacobianPoint jacobian_from_affine(const AffinePoint& p) {
    if (p.infinity) return JacobianPoint{{}, {}, {}};
    return JacobianPoint{p.x, p.y, {{1, 0, 0}}};
}

JacobianPoint point_double(const JacobianPoint& p) {
    if (p.infinity() || p.y.is_zero()) return JacobianPoint{{}, {}, {}};
    U192 zz = mul_mod_p(p.z, p.z);
    U192 yy = mul_mod_p(p.y, p.y);
    U192 s = mul_mod_p(p.x, yy);
    s = add_mod(s, s, kP);
    s = add_mod(s, s, kP);  // s = 4*x*y^2
    // m = 3*(x - z^2)*(x + z^2), valid since a = -3
    U192 m = mul_mod_p(sub_mod(p.x, zz, kP), add_mod(p.x, zz, kP));
    m = add_mod(add_mod(m, m, kP), m, kP);
    U192 x3 = sub_mod(sub_mod(mul_mod_p(m, m), s, kP), s, kP);
    U192 yyyy = mul_mod_p(yy, yy);
    U192 y8 = add_mod(yyyy, yyyy, kP);
    y8 = add_mod(y8, y8, kP);
    y8 = add_mod(y8, y8, kP);  // 8*y^4
    U192 y3 = sub_mod(mul_mod_p(m, sub_mod(s, x3, kP)), y8, kP);
    U192 z3 = mul_mod_p(p.y, p.z);
    z3 = add_mod(z3, z3, kP);
    return JacobianPoint{x3, y3, z3};
}

// Mixed addition: jacobian + affine.
JacobianPoint point_add_mixed(const JacobianPoint& p, const AffinePoint& q) {
    if (q.infinity) return p;
    if (p.infinity()) return jacobian_from_affine(q);
    U192 z1z1 = mul_mod_p(p.z, p.z);
    U192 u2 = mul_mod_p(q.x, z1z1);
    U192 s2 = mul_mod_p(mul_mod_p(q.y, p.z), z1z1);
    U192 h = sub_mod(u2, p.x, kP);
    U192 r = sub_mod(s2, p.y, kP);
    if (h.is_zero()) {
        if (r.is_zero()) return point_double(p);
        return JacobianPoint{{}, {}, {}};
    }
    U192 hh = mul_mod_p(h, h);
    U192 hhh = mul_mod_p(hh, h);
    U192 v = mul_mod_p(p.x, hh);
    U192 x3 = sub_mod(sub_mod(sub_mod(mul_mod_p(r, r), hhh, kP), v, kP), v, kP);
    U192 y3 = sub_mod(mul_mod_p(r, sub_mod(v, x3, kP)), mul_mod_p(p.y, hhh), kP);
    U192 z3 = mul_mod_p(p.z, h);
    return JacobianPoint{x3, y3, z3};
}

AffinePoint to_affine(const JacobianPoint& p) {
    if (p.infinity()) return AffinePoint{};
    U192 zinv = inv_mod(p.z, kP);
    U192 zinv2 = mul_mod_p(zinv, zinv);
    AffinePoint out;
    out.x = mul_mod_p(p.x, zinv2);
    out.y = mul_mod_p(p.y, mul_mod_p(zinv2, zinv));
    out.infinity = false;
    return out;
}

AffinePoint scalar_mult(const U192& k, const AffinePoint& p) {
    JacobianPoint acc{{}, {}, {}};
    bool started = false;
    for (int i = 191; i >= 0; --i) {
        if (started) acc = point_double(acc);
        if (k.bit(i)) {
            acc = point_add_mixed(acc, p);
            started = true;
        }
    }
    return to_affine(acc);
}

// u1*G + u2*Q via sequential double-and-add over both.
AffinePoint double_scalar_mult(const U192& u1, const AffinePoint& g, const U192& u2,
                               const AffinePoint& q) {
    JacobianPoint acc{{}, {}, {}};
    for (int i = 191; i >= 0; --i) {
        acc = point_double(acc);
        if (u1.bit(i)) acc = point_add_mixed(acc, g);
        if (u2.bit(i)) acc = point_add_mixed(acc, q);
    }
    return to_affine(acc);
}

U192 from_be_bytes(const std::uint8_t* data, std::size_t n) {
    U192 out;
    for (std::size_t i = 0; i < n && i < 24; ++i) {
        std::size_t pos = n - 1 - i;  // little-endian limb fill from the tail
        out.w[i / 8] |= static_cast<u64>(data[pos]) << (8 * (i % 8));
    }
    return out;
}

void to_be_bytes(const U192& v, std::uint8_t* out) {
    for (int i = 0; i < 24; ++i) out[i] = static_cast<std::uint8_t>(v.w[2 - i / 8] >> (56 - 8 * (i % 8)));
}

bool affine_on_curve(const AffinePoint& p) {
    if (p.infinity) return false;
    if (cmp(p.x, kP) >= 0 || cmp(p.y, kP) >= 0) return false;
    // y^2 == x^3 - 3x + b
    U192 lhs = mul_mod_p(p.y, p.y);
    U192 rhs = mul_mod_p(mul_mod_p(p.x, p.x), p.x);
    U192 threeX = add_mod(add_mod(p.x, p.x, kP), p.x, kP);
    rhs = sub_mod(rhs, threeX, kP);
    rhs = add_mod(rhs, kB, kP);
    return lhs == rhs;
}

std::optional<AffinePoint> decode_point(const PublicKey& pub) {
    AffinePoint p;
    p.x = from_be_bytes(pub.raw.data(), 24);
    p.y = from_be_bytes(pub.raw.data() + 24, 24);
    p.infinity = false;
    if (!affine_on_curve(p)) return std::nullopt;
    return p;
}

PublicKey encode_point(const AffinePoint& p) {
    PublicKey out;
    to_be_bytes(p.x, out.raw.data());
    to_be_bytes(p.y, out.raw.data() + 24);
    return out;
}

U192 scalar_from_digest(const Digest256& d) {
    U384 wide;
    // Leftmost 192 bits of the digest.
    for (int i = 0; i < 24; ++i)
        wide.w[(23 - i) / 8] |= static_cast<u64>(d[i]) << (8 * ((23 - i) % 8));
    return reduce_generic(wide, kOrder);
}

AffinePoint generator() { return AffinePoint{kGx, kGy, false}; }

U192 reduce_scalar(U192 v) {
    while (cmp(v, kOrder) >= 0) sub_raw(v, v, kOrder);
    return v;
}

}  // namespace

std::optional<PublicKey> derive_public(const PrivateKey& priv) {
    U192 d = reduce_scalar(from_be_bytes(priv.raw.data(), 24));
    if (d.is_zero()) return std::nullopt;
    return encode_point(scalar_mult(d, generator()));
}

KeyPair keypair_from_seed(BytesView seed) {
    // Hash-chain until the scalar is valid; terminates almost surely at once.
    Bytes material(seed.begin(), seed.end());
    for (;;) {
        auto h = Sha256::digest(material);
        U192 d = reduce_scalar(from_be_bytes(h.data(), 24));
        if (!d.is_zero()) {
            KeyPair kp;
            to_be_bytes(d, kp.priv.raw.data());
            kp.pub = *derive_public(kp.priv);
            return kp;
        }
        material.assign(h.begin(), h.end());
    }
}

Signature sign(const PrivateKey& priv, BytesView message) {
    U192 d = reduce_scalar(from_be_bytes(priv.raw.data(), 24));
    Digest256 digest = Sha256::digest(message);
    U192 z = scalar_from_digest(digest);

    for (std::uint32_t attempt = 0;; ++attempt) {
        // Deterministic nonce from (priv, digest, attempt).
        ByteWriter w;
        w.raw(BytesView(priv.raw.data(), priv.raw.size()));
        w.raw(BytesView(digest.data(), digest.size()));
        w.u32(attempt);
        U192 k = reduce_scalar(from_be_bytes(Sha256::digest(w.bytes()).data(), 24));
        if (k.is_zero()) continue;

        AffinePoint rp = scalar_mult(k, generator());
        if (rp.infinity) continue;
        U192 r = rp.x;
        while (cmp(r, kOrder) >= 0) sub_raw(r, r, kOrder);
        if (r.is_zero()) continue;

        U192 kinv = inv_mod(k, kOrder);
        U192 s = mul_mod(kinv, add_mod(z, mul_mod(r, d, kOrder), kOrder), kOrder);
        if (s.is_zero()) continue;

        Signature sig;
        to_be_bytes(r, sig.raw.data());
        to_be_bytes(s, sig.raw.data() + 24);
        return sig;
    }
}

bool verify(const PublicKey& pub, BytesView message, const Signature& sig) {
    auto q = decode_point(pub);
    if (!q) return false;
    U192 r = from_be_bytes(sig.raw.data(), 24);
    U192 s = from_be_bytes(sig.raw.data() + 24, 24);
    if (r.is_zero() || s.is_zero() || cmp(r, kOrder) >= 0 || cmp(s, kOrder) >= 0) return false;

    U192 z = scalar_from_digest(Sha256::digest(message));
    U192 w = inv_mod(s, kOrder);
    U192 u1 = mul_mod(z, w, kOrder);
    U192 u2 = mul_mod(r, w, kOrder);
    AffinePoint p = double_scalar_mult(u1, generator(), u2, *q);
    if (p.infinity) return false;
    U192 v = p.x;
    while (cmp(v, kOrder) >= 0) sub_raw(v, v, kOrder);
    return v == r;
}

std::optional<std::array<std::uint8_t, 16>> ecdh(const PrivateKey& priv, const PublicKey& peer) {
    auto q = decode_point(peer);
    if (!q) return std::nullopt;
    U192 d = reduce_scalar(from_be_bytes(priv.raw.data(), 24));
    if (d.is_zero()) return std::nullopt;
    AffinePoint shared = scalar_mult(d, *q);
    if (shared.infinity) return std::nullopt;
    std::uint8_t xbytes[24];
    to_be_bytes(shared.x, xbytes);
    auto h = Sha256::digest(BytesView(xbytes, 24));
    std::array<std::uint8_t, 16> out{};
    std::memcpy(out.data(), h.data(), 16);
    return out;
}

bool on_curve(const PublicKey& pub) { return decode_point(pub).has_value(); }

}  // namespace imdsec::crypto::p192
