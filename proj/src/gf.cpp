#include "recon/gf.hpp"

#include <stdexcept>
#include <string>

namespace recon {

namespace {

// Fixed primitive polynomial per extension degree, as a coefficient bitmask.
// v=1 is the degenerate x+1 (GF(2) needs no reduction); the rest are the
// conventional minimal-weight primitive polynomials with x as a generator.
unsigned primitive_poly_for(unsigned v) {
    switch (v) {
        case 1: return 0x3;    // x + 1
        case 2: return 0x7;    // x^2 + x + 1
        case 3: return 0xB;    // x^3 + x + 1
        case 4: return 0x13;   // x^4 + x + 1
        case 5: return 0x25;   // x^5 + x^2 + 1
        case 6: return 0x43;   // x^6 + x + 1
        case 7: return 0x83;   // x^7 + x + 1
        case 8: return 0x11D;  // x^8 + x^4 + x^3 + x^2 + 1
        default: throw std::invalid_argument("gf: unsupported extension degree");
    }
}

}  // namespace

GfContext GfContext::make(unsigned q) {
    if (q < 2 || q > 256 || (q & (q - 1)) != 0)
        throw std::invalid_argument("gf: order must be a power of two in [2, 256], got " +
                                    std::to_string(q));
    GfContext ctx;
    ctx.q = q;
    ctx.v = 0;
    for (unsigned t = q; t > 1; t >>= 1) ++ctx.v;
    ctx.primitive_poly = primitive_poly_for(ctx.v);

    // Walk powers of x, reducing by the primitive polynomial on overflow.
    unsigned a = 1;
    for (unsigned i = 0; i + 1 < q; ++i) {
        ctx.exp_table[i] = static_cast<gf_elem>(a);
        ctx.log_table[a] = static_cast<gf_elem>(i);
        a <<= 1;
        if (a & q) a ^= ctx.primitive_poly;
        // Returning to 1 is only legal on the last step, after exp[q-2].
        if (a == 1 && i + 2 < q)
            throw std::logic_error("gf: generator cycle shorter than q-1");
    }
    if (a != 1) throw std::logic_error("gf: generator does not cycle back to 1");
    return ctx;
}

gf_elem GfContext::div(gf_elem a, gf_elem b) const {
    if (b == 0) throw std::domain_error("gf: division by zero");
    if (a == 0) return 0;
    unsigned d = (log_table[a] + (q - 1) - log_table[b]) % (q - 1);
    return exp_table[d];
}

}  // namespace recon
