#pragma once

// Straight-line reference for one factory transition, written against the
// model description rather than the library code: plain arrays, no helper
// calls into the environment module.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

struct FactoryParams {
  int agents = 6;
  int sites = 2;
  double amr_cap = 500;
  double wh_cap = 2000;
  double unit = 6;
  int tau = 3;
  double w_delay = 0.1, w_amr = 1, w_wh = 10;
  double outflow = 100;
  double q_low = 30, q_high = 90;
  bool normalize = true;
};

struct FactorySnapshot {
  std::vector<double> amr, tp, fp, wh;
  std::vector<int> pending;
};

struct OracleStep {
  FactorySnapshot next;
  std::vector<double> uq, ud, ub, uw;
  std::vector<double> amr_under, amr_over, wh_under, wh_over;
  double reward = 0;
};

// action: 0..3 are (site 0, low), (site 0, high), (site 1, low), (site 1, high)
// for two sites; the last index is the quality request.
inline OracleStep factory_step(const FactoryParams& P, const FactorySnapshot& S,
                               const std::vector<int>& action,
                               const std::vector<double>& arr_mass,
                               const std::vector<double>& arr_tp,
                               const std::vector<double>& arr_fp) {
  OracleStep o;
  o.next = S;
  const int quality_index = 2 * P.sites;
  std::vector<double> inflow(P.sites, 0.0);
  o.uq.resize(P.agents); o.ud.resize(P.agents); o.ub.resize(P.agents);
  o.amr_under.resize(P.agents); o.amr_over.resize(P.agents);
  double r = 0;
  for (int n = 0; n < P.agents; ++n) {
    double c = S.amr[n], tp = S.tp[n], fp = S.fp[n];
    int pend = S.pending[n];
    double p = 0;
    int site = 0;
    double ud = -1;
    if (pend > 0) {
      pend -= 1;
      if (pend == 0) { c = c - fp * P.unit; if (c < 0) c = 0; fp = 0; }
    } else if (action[n] == quality_index) {
      ud = -1 - P.tau;
      pend = P.tau;
      if (P.tau == 0) { c = c - fp * P.unit; if (c < 0) c = 0; fp = 0; }
    } else {
      site = action[n] / 2;
      p = (action[n] % 2 == 0) ? P.q_low : P.q_high;
    }
    const double raw = c - p + arr_mass[n];
    double nc = raw;
    if (nc < 0) nc = 0;
    if (nc > P.amr_cap) nc = P.amr_cap;
    const double sent = (c + arr_mass[n] < p) ? c + arr_mass[n] : p;
    inflow[site] += sent;
    const double before = c + arr_mass[n];
    const double frac = before > 0 ? nc / before : 0;
    const double ntp = (tp + arr_tp[n]) * frac;
    const double nfp = (fp + arr_fp[n]) * frac;
    double ub = 0;
    if (nc == 0) ub -= std::fabs(raw);
    if (nc == P.amr_cap) ub -= std::fabs(P.amr_cap - std::fabs(raw));
    o.next.amr[n] = nc; o.next.tp[n] = ntp; o.next.fp[n] = nfp; o.next.pending[n] = pend;
    o.uq[n] = (ntp + nfp) > 0 ? ntp / (ntp + nfp) : 1.0;
    o.ud[n] = ud;
    o.ub[n] = ub;
    o.amr_under[n] = raw < 0 ? -raw : 0;
    o.amr_over[n] = raw > P.amr_cap ? raw - P.amr_cap : 0;
    r += o.uq[n] + P.w_delay * ud + P.w_amr * (P.normalize ? ub / P.amr_cap : ub);
  }
  o.uw.resize(P.sites); o.wh_under.resize(P.sites); o.wh_over.resize(P.sites);
  for (int m = 0; m < P.sites; ++m) {
    const double raw = S.wh[m] - P.outflow + inflow[m];
    double nw = std::min(P.wh_cap, std::max(0.0, raw));
    double uw = 0;
    if (nw == 0) uw -= std::fabs(raw);
    if (nw == P.wh_cap) uw -= std::fabs(P.wh_cap - std::fabs(raw));
    o.next.wh[m] = nw;
    o.uw[m] = uw;
    o.wh_under[m] = raw < 0 ? -raw : 0;
    o.wh_over[m] = raw > P.wh_cap ? raw - P.wh_cap : 0;
    r += P.w_wh * (P.normalize ? uw / P.wh_cap : uw);
  }
  o.reward = r;
  return o;
}

}  // namespace oracle
