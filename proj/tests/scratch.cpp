#include <cstdio>
#include "ion/wkb.hpp"
using namespace ion;
int main() {
    ForcingProfile fp; fp.form = "const"; fp.amplitude = 0.5;
    WKBFrame fr = WKBFrame::make(fp, 1.0, 1.0, 0, 0, 0, 0.0);
    for (int k : {10, 30, 60}) {
        auto hk = std::make_shared<HProfile>(solve_H(k, fr));
        auto hkm1 = std::make_shared<HProfile>(solve_H(k-1, fr));
        MkProfile mk = make_mk(k, fr, hk);
        MkProfile mkm1 = make_mk(k-1, fr, hkm1);
        for (double r : {0.1, 0.3, 0.7, 0.95}) {
            double d = 2e-4;
            double lm2 = mk.log_mk(r-2*d), lm1 = mk.log_mk(r-d), l0 = mk.log_mk(r),
                   lp1 = mk.log_mk(r+d), lp2 = mk.log_mk(r+2*d);
            double d1 = (lm2 - 8*lm1 + 8*lp1 - lp2)/(12*d);
            double d2v = (-lm2 + 16*lm1 - 30*l0 + 16*lp1 - lp2)/(12*d*d);
            double Lm_over_m = d2v + d1*d1 + fr.Qk(k, r);
            double ratio = fp.value(r)*std::exp(mkm1.log_mk(r) - l0);
            double jfd = fr.s_of_r(r)*(Lm_over_m - ratio);
            double jan = j_k_eval(k, r, fr, *hk, *hkm1).value;
            std::printf("k=%d r=%.2f: rel=%.2e\n", k, r, std::abs(jfd-jan)/std::max(0.01,std::abs(jan)));
        }
    }
    return 0;
}
