// Acceptance suite. `acceptance <id>` runs one criterion, no argument runs all ten.
// Each criterion prints a single "criterion N: PASS|FAIL ..." line.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "../unit/helpers.hpp"
#include "aircomp/io.hpp"

using namespace aircomp;
using namespace testutil;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures.push_back(what);
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool near(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max({1e-300, std::abs(a), std::abs(b)}); }

CMatrix diag2(double a, double b) {
  CMatrix M = CMatrix::Zero(2, 2);
  M(0, 0) = a;
  M(1, 1) = b;
  return M;
}

double grid_best_gain(const CVector& q, int levels) {
  const int N = static_cast<int>(q.size()) - 1;
  double best = 0.0;
  std::vector<int> idx(static_cast<std::size_t>(N), 0);
  while (true) {
    CVector vbar(N + 1);
    for (int n = 0; n < N; ++n) vbar[n] = std::polar(1.0, 2 * kPi * idx[static_cast<std::size_t>(n)] / levels);
    vbar[N] = 1.0;
    best = std::max(best, lifted_gain(vbar, q));
    int n = 0;
    while (n < N && ++idx[static_cast<std::size_t>(n)] == levels) idx[static_cast<std::size_t>(n++)] = 0;
    if (n == N) break;
  }
  return best;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------------------

void formula_suite(Outcome& o) {
  // path loss
  o.expect(near(path_loss_linear(1, 3.3, 30), 1e-3, 1e-12), "path loss (1, 3.3, 30)");
  o.expect(near(path_loss_linear(10, 2.3, 30), std::pow(10.0, -5.3), 1e-12), "path loss (10, 2.3, 30)");
  o.expect(near(path_loss_linear(100, 3.3, 30), std::pow(10.0, -9.6), 1e-12), "path loss (100, 3.3, 30)");

  // channel synthesis
  {
    const SystemConfig c = small_config(3, 3, 5, 2, 42);
    const ChannelSet a = synthesize_channels(c), b = synthesize_channels(c);
    bool same = a.irs_ap == b.irs_ap;
    for (int l = 0; l < 3; ++l) {
      for (int k = 0; k < 3; ++k) same = same && a.direct[l][k] == b.direct[l][k] && a.reflect[l][k] == b.reflect[l][k];
    }
    o.expect(same, "channel determinism");

    SystemConfig m = small_config(1, 1, 0, 1);
    const std::vector<std::vector<Position>> pos{{Position{10.0, 10.0, 0.0}}};
    std::mt19937_64 rng(7);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) sum += std::norm(draw_channels(m, pos, rng).direct[0][0]);
    const double expected = path_loss_linear(distance(pos[0][0], m.geometry.access_point), m.alpha_direct,
                                             m.pathloss_ref_db);
    o.expect(std::abs(sum / 1e5 - expected) / expected < 0.02, "fading second moment within 2%");

    SystemConfig z = small_config(2, 4, 2, 1);
    z.geometry.placement_radius = 0.0;
    const ChannelSet zc = synthesize_channels(z);
    bool centered = true;
    for (int l = 0; l < 2; ++l) {
      for (const Position& p : zc.device_positions[static_cast<std::size_t>(l)]) {
        centered = centered && distance(p, z.geometry.access_point) ==
                                   distance(zc.device_positions[static_cast<std::size_t>(l)][0], z.geometry.access_point);
      }
    }
    o.expect(centered, "zero radius gives equal distances");
  }

  // composite gain, lifting, min gain
  {
    ChannelSet ch = blank_channels(1, 1, 1);
    ch.irs_ap[0] = 1.0;
    ch.reflect[0][0][0] = 1.0;
    o.expect(near(composite_gain(ch, 0, 0, BeamPattern::ones(1)), 1.0, 1e-12), "composite gain 1");
    ch.direct[0][0] = 1.0;
    o.expect(near(composite_gain(ch, 0, 0, BeamPattern::ones(1)), 4.0, 1e-12), "composite gain 4");
    ch.reflect[0][0][0] = cplx(0.0, 1.0);
    o.expect(near(composite_gain(ch, 0, 0, BeamPattern::from_phases(RVector::Constant(1, kPi / 2))), 4.0, 1e-12),
             "composite gain with quarter-turn phase");

    ChannelSet q1 = blank_channels(1, 1, 1);
    q1.irs_ap[0] = 1.0;
    q1.reflect[0][0][0] = 1.0;
    q1.direct[0][0] = 2.0;
    const CVector q = lift_channel(q1, 0, 0);
    o.expect(q[0] == cplx(1.0, 0.0) && q[1] == cplx(2.0, 0.0), "lifted channel [1, 2]");

    const SystemConfig c = small_config(2, 3, 6, 1, 5);
    const ChannelSet rc = synthesize_channels(c);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ph(0.0, 2 * kPi);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      RVector phases(6);
      for (int n = 0; n < 6; ++n) phases[n] = ph(rng);
      const BeamPattern p = BeamPattern::from_phases(phases);
      CVector vbar(7);
      vbar.head(6) = p.v;
      vbar[6] = 1.0;
      for (int l = 0; l < 2; ++l) {
        for (int k = 0; k < 3; ++k) {
          const double direct = composite_gain(rc, l, k, p);
          worst = std::max(worst, std::abs(lifted_gain(vbar, lift_channel(rc, l, k)) - direct) / direct);
        }
      }
    }
    o.expect(worst <= 1e-10, "lifted quadratic form equals composite gain");

    ChannelSet blocked = blank_channels(1, 1, 3);
    blocked.direct[0][0] = cplx(0.3, -0.4);
    for (int n = 0; n < 3; ++n) blocked.reflect[0][0][n] = cplx(1.0, n);
    const CVector qb = lift_channel(blocked, 0, 0);
    o.expect(qb.head(3).norm() == 0.0 && qb[3] == blocked.direct[0][0], "blocked IRS lifts to [0, h^d]");

    ChannelSet mg = blank_channels(1, 3, 0);
    mg.direct[0] = {2.0, 1.0, 3.0};
    const MinGain m = min_gain(mg, 0, BeamPattern::ones(0));
    o.expect(near(m.value, 1.0, 1e-12) && m.device == 1, "min gain {4, 1, 9}");
    ChannelSet single = blank_channels(1, 1, 0);
    single.direct[0][0] = 3.0;
    o.expect(near(min_gain(single, 0, BeamPattern::ones(0)).value, 9.0, 1e-12), "min gain single device");
    ChannelSet tie = blank_channels(1, 2, 0);
    tie.direct[0] = {cplx(1.0, 0.0), cplx(0.0, 1.0)};
    o.expect(min_gain(tie, 0, BeamPattern::ones(0)).device == 0, "min gain tie-break");
  }

  // transceiver and rate formulas
  {
    const std::vector<double> ones{1, 1, 1}, g14{1, 4}, g1{0.37};
    TransceiverSetting s = uniform_forcing(ones, 1.0);
    o.expect(near(s.eta, 1.0, 1e-12) && near(s.powers[2], 1.0, 1e-12), "uniform forcing symmetric");
    s = uniform_forcing(g14, 2.0);
    o.expect(near(s.eta, 2.0, 1e-12) && near(s.powers[0], 2.0, 1e-12) && near(s.powers[1], 0.5, 1e-12),
             "uniform forcing [1, 4]");
    s = uniform_forcing(g1, 3.0);
    o.expect(near(s.eta, 1.11, 1e-12) && near(s.powers[0], 3.0, 1e-12), "uniform forcing single gain");

    // e min|h|^2 / (t sigma^2) = 0.01 * 1e-9 / (0.1 * 1e-11)
    o.expect(near(effective_snr(0.01, 0.1, 1e-9, 1e-11), 10.0, 1e-12), "effective snr = 10");
    o.expect(effective_snr(0.0, 0.1, 1e-9, 1e-11) == 0.0, "effective snr at zero energy");
    o.expect(near(effective_snr(0.02, 0.6, 2e-9, 1e-11), effective_snr(0.02, 0.3, 2e-9, 1e-11) / 2, 1e-12),
             "effective snr halves with doubled time");

    o.expect(computation_rate(1.0, 2, 5) == 0.0, "rate at snr 1");
    o.expect(computation_rate(0.5, 2, 5) == 0.0, "rate clamp");
    o.expect(near(computation_rate(16.0, 2, 4), 1.0, 1e-15), "rate at snr 16");

    o.expect(volume_term(0.0, 3.0, 1e-11, 2, 4) == 0.0, "volume at t = 0");
    o.expect(near(volume_term(0.1, 1024 * 0.1 * 1e-11, 1e-11, 2, 4), 0.25, 1e-12), "volume 0.25");
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    bool concave = true;
    for (int i = 0; i < 500; ++i) {
      const double t1 = u(rng), t2 = u(rng);
      const double S1 = t1 * 1e-11 * (1 + 1e3 * u(rng)), S2 = t2 * 1e-11 * (1 + 1e3 * u(rng));
      const double mid = volume_term(0.5 * (t1 + t2), 0.5 * (S1 + S2), 1e-11, 2, 5);
      const double avg = 0.5 * (volume_term(t1, S1, 1e-11, 2, 5) + volume_term(t2, S2, 1e-11, 2, 5));
      concave = concave && mid >= avg - 1e-15;
    }
    o.expect(concave, "volume midpoint concavity");

    const std::vector<double> c11{1, 1}, c13{1, 3}, c721{7, 21};
    auto t = proportional_time_allocation(c11, 0.1);
    o.expect(near(t[0], 0.05, 1e-12) && near(t[1], 0.05, 1e-12), "proportional [1, 1]");
    t = proportional_time_allocation(c13, 0.1);
    o.expect(near(t[0], 0.025, 1e-12) && near(t[1], 0.075, 1e-12), "proportional [1, 3]");
    const auto ts = proportional_time_allocation(c721, 0.1);
    o.expect(near(ts[0], t[0], 1e-12), "proportional scale invariance");
    double best_t = 0.0, best = -1.0;
    for (int i = 1; i < 20000; ++i) {
      const double t1 = 0.1 * i / 20000.0;
      const double v = t1 * std::log2(100 / t1) + (0.1 - t1) * std::log2(300 / (0.1 - t1));
      if (v > best) best = v, best_t = t1;
    }
    o.expect(std::abs(best_t - 0.025) <= 1e-5, "grid search confirms the proportional optimum");
  }

  // evaluate_solution
  {
    SystemConfig c = small_config(1, 1, 0, 1);
    c.quantization_bits = 2;
    c.rate_devices = 4;
    c.noise_power = {1e-11};
    ChannelSet ch = blank_channels(1, 1, 0);
    ch.direct[0][0] = std::sqrt(16 * 0.1 * 1e-11 / 0.01);
    Solution s;
    s.allocation = Allocation::zeros(1, 1);
    o.expect(evaluate_solution(c, ch, s).objective == 0.0, "evaluation with zero times");
    s.allocation.times(0, 0) = 0.1;
    s.allocation.energies(0, 0) = 0.01;
    o.expect(near(evaluate_solution(c, ch, s).objective, 0.1, 1e-12), "hand-built snr 16 case gives 0.1");
  }

  // majorizer and extraction
  {
    o.expect(near(spectral_majorizer(diag2(2, 1), diag2(2, 1)), 1.0, 1e-12), "majorizer exact at expansion");
    o.expect(near(spectral_majorizer(diag2(1, 2), diag2(2, 1)), 2.0, 1e-12), "majorizer diag(1,2) at diag(2,1)");
    o.expect(near(spectral_majorizer(CMatrix::Identity(2, 2), diag2(2, 1)), 1.0, 1e-12), "majorizer at identity");
    CVector vbar(2);
    vbar << std::polar(1.0, kPi / 3), 1.0;
    const ExtractedPattern e = extract_pattern(LiftedPattern{vbar * vbar.adjoint()});
    o.expect(std::abs(e.pattern.v[0] - std::polar(1.0, kPi / 3)) < 1e-12, "rank-one extraction round trip");
    const ExtractedPattern id = extract_pattern(LiftedPattern{CMatrix::Identity(2, 2)});
    o.expect(id.pattern.is_unit_modulus() && near(id.residual, 0.5, 1e-12), "identity extraction residual 0.5");
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ph(0.0, 2 * kPi);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      CVector v(7);
      for (int i = 0; i < 6; ++i) v[i] = std::polar(1.0, ph(rng));
      v[6] = 1.0;
      const CMatrix V = v * v.adjoint() + 1e-8 * random_psd(rng, 7, 2) / 7.0;
      const CVector q = random_cvector(rng, 7);
      const double lifted = (V * q * q.adjoint()).trace().real();
      const ExtractedPattern ex = extract_pattern(LiftedPattern{V});
      CVector rec(7);
      rec.head(6) = ex.pattern.v;
      rec[6] = 1.0;
      worst = std::max(worst, std::abs(lifted_gain(rec, q) - lifted) / std::max(1.0, lifted));
    }
    o.expect(worst <= 1e-6, "noisy rank-one extraction");
  }

  // cluster-adaptive
  {
    const SystemConfig c0 = small_config(3, 4, 0, 3, 8);
    const ChannelSet ch0 = synthesize_channels(c0);
    const PenaltySubproblemResult r = penalty_subproblem(ch0, c0, initial_penalty_state(c0, ch0));
    std::vector<double> cv;
    bool gamma_ok = true;
    for (int l = 0; l < 3; ++l) {
      gamma_ok = gamma_ok && near(r.state.gamma[l], min_direct_gain(ch0, l).value, 1e-12);
      cv.push_back(c0.energy_budget * r.state.gamma[l] / c0.noise(l));
    }
    const auto tp = proportional_time_allocation(cv, c0.frame_time);
    for (int l = 0; l < 3; ++l) gamma_ok = gamma_ok && near(r.state.times[l], tp[l], 1e-12);
    o.expect(gamma_ok, "N = 0 subproblem reduces to direct links");

    SystemConfig c1 = small_config(1, 1, 1, 1);
    ChannelSet ch1 = blank_channels(1, 1, 1);
    ch1.irs_ap[0] = 1.0;
    ch1.reflect[0][0][0] = 1.0;
    ch1.direct[0][0] = 1.0;
    o.expect(near(grid_best_gain(lift_channel(ch1, 0, 0), 64), 4.0, 1e-12) &&
                 near(solve_upper_bound(c1, ch1).gamma[0], 4.0, 1e-7),
             "q = [1, 1] relaxed gain 4");

    const SystemConfig c3 = small_config(3, 3, 5, 3, 4);
    ChannelSet blocked = synthesize_channels(c3);
    blocked.irs_ap.setZero();
    const double base = baseline_no_irs(c3, blocked).objective;
    o.expect(near(solve_cluster_adaptive(c3, blocked).objective, base, 1e-12), "g = 0 adaptive equals no-IRS");
    o.expect(near(solve_upper_bound(c3, blocked).value, base, 1e-8), "g = 0 bound equals no-IRS");

    const SystemConfig cs = small_config(1, 1, 3, 1, 2);
    const ChannelSet chs = synthesize_channels(cs);
    o.expect(solve_upper_bound(cs, chs).gamma[0] >= grid_best_gain(lift_channel(chs, 0, 0), 64) * (1 - 1e-9),
             "single device bound above the 64-level grid");

    const SystemConfig c2 = small_config(2, 1, 2, 2, 1);
    const ChannelSet ch2 = synthesize_channels(c2);
    const double a2 = solve_cluster_adaptive(c2, ch2).objective;
    o.expect(std::abs(a2 - solve_adaptive_decomposed(c2, ch2).objective) <= 0.01 * a2, "L = 2 decomposed within 1%");
    o.expect(a2 <= solve_upper_bound(c2, ch2).value * (1 + 1e-9), "adaptive below the bound");

    const SystemConfig cl = small_config(1, 4, 6, 1, 9);
    const ChannelSet chl = synthesize_channels(cl);
    o.expect(solve_cluster_adaptive(cl, chl).objective == solve_adaptive_decomposed(cl, chl).objective,
             "single cluster decomposed identical");

    const SystemConfig ce = small_config(2, 2, 4, 2, 3);
    ChannelSet che = synthesize_channels(ce);
    che.direct[1] = che.direct[0];
    che.reflect[1] = che.reflect[0];
    const Solution de = solve_adaptive_decomposed(ce, che);
    o.expect(near(de.allocation.times(0, 0), de.allocation.times(1, 1), 1e-12), "identical clusters split time equally");
  }

  // dynamic
  {
    o.expect(near(bilinear_minorant(1, 1, 1, 1), 1.0, 1e-15), "bilinear minorant exact");
    o.expect(near(bilinear_minorant(2, 1, 1, 1), 1.5, 1e-15), "bilinear minorant (2,1) at (1,1)");
    o.expect(bilinear_minorant(0, 0, 3, 2) <= 0.0, "bilinear minorant at the origin");
    CVector a(2), b(2);
    a << 1.0, 1.0;
    b << 1.0, -1.0;
    const CMatrix I = CMatrix::Identity(2, 2);
    o.expect(near(quadratic_form_minorant(a, a, I), 2.0, 1e-15), "quadratic minorant exact");
    o.expect(near(quadratic_form_minorant(b, a, I), -2.0, 1e-15), "quadratic minorant [1,-1] at [1,1]");
    CVector q(2), perp(2);
    q << cplx(1.0, 2.0), cplx(-0.5, 0.3);
    perp << -std::conj(q[1]), std::conj(q[0]);
    o.expect(quadratic_form_minorant(perp, q, q * q.adjoint()) <= 0.0, "quadratic minorant orthogonal sign");

    CVector p1(1), z(1);
    p1 << std::polar(0.5, kPi / 4);
    z << 0.0;
    o.expect(std::abs(project_unit_modulus(p1).v[0] - std::polar(1.0, kPi / 4)) < 1e-15, "projection of 0.5 e^{j pi/4}");
    CVector um(2);
    um << std::polar(1.0, 0.3), cplx(-1.0, 0.0);
    o.expect(project_unit_modulus(um).v == um, "projection idempotent");
    o.expect(project_unit_modulus(z).v[0] == cplx(1.0, 0.0), "projection of zero");

    Solution as;
    as.allocation = Allocation::zeros(2, 2);
    as.allocation.times(0, 0) = 0.05;
    as.allocation.times(1, 0) = 0.03;
    as.allocation.times(1, 1) = 0.02;
    const Association asc = extract_association(as, 0.1);
    o.expect(asc.pattern[0] == 0 && !asc.split[0], "association [0.05, 0]");
    o.expect(asc.pattern[1] == 0 && asc.split[1], "association [0.03, 0.02] split");

    const SystemConfig cw = small_config(3, 3, 6, 3, 1);
    const ChannelSet chw = synthesize_channels(cw);
    const Solution warm = solve_cluster_adaptive(cw, chw);
    const DynamicStepResult step = dynamic_subproblem(chw, cw, dynamic_state_from_solution(cw, chw, warm));
    o.expect(step.surrogate >= warm.objective - 1e-8, "warm-started surrogate above the warm start");

    ChannelSet direct_only = chw;
    direct_only.irs_ap.setZero();
    const double base = baseline_no_irs(cw, direct_only).objective;
    o.expect(near(solve_dynamic(cw, direct_only, 2).objective, base, 1e-12), "direct-only dynamic equals no-IRS");

    SystemConfig c1 = small_config(1, 1, 1, 1, 3);
    const ChannelSet ch1 = synthesize_channels(c1);
    DynamicState s = initial_dynamic_state(c1, ch1, {BeamPattern::ones(1)});
    for (int it = 0; it < 30; ++it) s = dynamic_subproblem(ch1, c1, s).state;
    const double grid = grid_best_gain(lift_channel(ch1, 0, 0), 64);
    o.expect(near(s.times(0, 0), c1.frame_time, 1e-6) && near(s.energies(0, 0), c1.energy_budget, 1e-6) &&
                 std::abs(s.gammas(0, 0) - grid) <= 0.02 * grid,
             "scalar instance reaches the 64-level grid");

    const SystemConfig ci = small_config(2, 2, 4, 1, 2);
    ChannelSet chi = synthesize_channels(ci);
    chi.direct[1] = chi.direct[0];
    chi.reflect[1] = chi.reflect[0];
    const Solution sh = solve_dynamic(ci, chi, 1);
    o.expect(sh.association == std::vector<int>{0, 0} && near(sh.allocation.times(0, 0), sh.allocation.times(1, 0), 1e-12),
             "identical clusters share one pattern with equal times");

    const SystemConfig cn = small_config(3, 2, 4, 3, 5);
    const ChannelSet chn = synthesize_channels(cn);
    Solution prev = solve_dynamic(cn, chn, 1);
    bool nested = true;
    for (int J = 2; J <= 3; ++J) {
      Solution init = prev;
      init.patterns.push_back(prev.patterns.front());
      init.allocation.times.conservativeResize(Eigen::NoChange, J);
      init.allocation.energies.conservativeResize(Eigen::NoChange, J);
      init.allocation.times.col(J - 1).setZero();
      init.allocation.energies.col(J - 1).setZero();
      const Solution next = solve_dynamic(cn, chn, J, init);
      nested = nested && next.objective >= prev.objective - 1e-12;
      prev = next;
    }
    o.expect(nested, "nested warm starts monotone in J");

    o.expect(near(solve_low_complexity(cw, chw, 3).objective, solve_adaptive_decomposed(cw, chw).objective, 1e-12),
             "low complexity at J = L equals decomposed");
    o.expect(rank_clusters({3, 2, 1}) == std::vector<int>{0, 1, 2}, "ranking (3, 2, 1)");
    SystemConfig cr = small_config(3, 1, 1, 2, 1);
    ChannelSet chr = blank_channels(3, 1, 1);
    chr.direct[0][0] = 3e-4;
    chr.direct[1][0] = 2e-4;
    chr.direct[2][0] = 1e-4;
    chr.reflect[0][0][0] = chr.reflect[1][0][0] = chr.reflect[2][0][0] = 1e-5;
    chr.irs_ap[0] = 1e-3;
    o.expect(solve_low_complexity(cr, chr, 2).association == std::vector<int>{0, 1, 1},
             "strongest cluster dedicated, the rest share");
  }

  // baselines and oracle
  {
    SystemConfig c = small_config(1, 1, 1, 1);
    ChannelSet ch = blank_channels(1, 1, 1);
    ch.irs_ap[0] = 1.0;
    ch.direct[0][0] = 1e-5;
    ch.reflect[0][0][0] = -0.6e-5;
    const Solution os = oracle_grid_search(c, ch, 1, 2);
    o.expect(std::real(os.patterns[0].v[0]) < -0.99, "two-point oracle picks the better sign");

    const SystemConfig c2 = small_config(2, 1, 2, 2, 1);
    const ChannelSet ch2 = synthesize_channels(c2);
    o.expect(oracle_grid_search(c2, ch2, 2, 8).objective <= solve_upper_bound(c2, ch2).value * (1 + 1e-9),
             "oracle below the bound");

    const SystemConfig cr = small_config(2, 2, 1, 1, 1);
    const ChannelSet chr = synthesize_channels(cr);
    o.expect(baseline_random(cr, chr, 1, 10000).objective >= oracle_grid_search(cr, chr, 1, 64).objective * (1 - 1e-3),
             "random baseline with 1e4 draws approaches the oracle");
    o.expect(baseline_random(c2, ch2, 2, 3).objective == baseline_random(c2, ch2, 2, 3).objective,
             "random baseline deterministic");

    SystemConfig cn = small_config(1, 1, 4, 1);
    cn.noise_power = {1e-11};
    cn.rate_devices = 5;
    ChannelSet chn = blank_channels(1, 1, 4);
    chn.direct[0][0] = std::sqrt(1e-9);
    const Solution nb = baseline_no_irs(cn, chn);
    const double rate = std::log2(10.0) / (2 + std::log2(5.0));
    o.expect(near(nb.per_cluster_rates[0], rate, 1e-12) && near(nb.objective, 0.1 * rate, 1e-12) &&
                 near(evaluate_solution(cn, chn, nb).objective, nb.objective, 1e-12),
             "no-IRS closed form (snr 10)");

    const SystemConfig c3 = small_config(3, 2, 4, 2, 5);
    ChannelSet nr = synthesize_channels(c3);
    for (auto& cl : nr.reflect) {
      for (auto& r : cl) r.setZero();
    }
    const double ref = baseline_no_irs(c3, nr).objective;
    o.expect(near(baseline_random(c3, nr, 2).objective, ref, 1e-12) &&
                 near(oracle_grid_search(c3, nr, 2, 4).objective, ref, 1e-12) &&
                 near(solve_dynamic(c3, nr, 2).objective, ref, 1e-6) &&
                 near(solve_cluster_adaptive(c3, nr).objective, ref, 1e-6),
             "h^r = 0 makes every algorithm equal");
    SystemConfig cj = c3;
    cj.pattern_budget = 1;
    o.expect(baseline_no_irs(cj, nr).objective == ref, "no-IRS independent of J");
  }
}

void c1(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  formula_suite(o);
  const double t = seconds_since(t0);
  o.expect(t < 1.0, "runtime");
  o.detail << "formula and small-instance examples, " << (o.failures.empty() ? "all hold" : "failures") << ", " << t
           << " s (limit 1 s)";
}

void c2(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  const int draws = 10000;
  double worst_exact = 0.0, worst_bound = 0.0;
  auto exact = [&](double got, double want) {
    worst_exact = std::max(worst_exact, std::abs(got - want) / std::max(1.0, std::abs(want)));
  };
  // positive excess means the one-sided bound is violated
  auto bound = [&](double excess, double scale) { worst_bound = std::max(worst_bound, excess / std::max(1.0, scale)); };
  for (int i = 0; i < draws; ++i) {
    const double e = u(rng), g = u(rng), e0 = u(rng), g0 = u(rng);
    exact(bilinear_minorant(e0, g0, e0, g0), e0 * g0);
    bound(bilinear_minorant(e, g, e0, g0) - e * g, e * g);
  }
  for (int i = 0; i < draws; ++i) {
    const int n = 2 + i % 7;
    const CMatrix Q = random_psd(rng, n, 1 + i % n);
    const CVector v = random_cvector(rng, n), v0 = random_cvector(rng, n);
    const double at0 = v0.dot(Q * v0).real(), at = v.dot(Q * v).real();
    exact(quadratic_form_minorant(v0, v0, Q), at0);
    bound(quadratic_form_minorant(v, v0, Q) - at, at);
  }
  for (int i = 0; i < draws; ++i) {
    const int n = 2 + i % 7;
    const CMatrix V = random_psd(rng, n, 1 + i % n);
    const CMatrix E = random_psd(rng, n, 1 + (i / 3) % n);
    const double tr = V.trace().real();
    const double pen = tr - V.selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();
    exact(spectral_majorizer(V, V), pen);
    bound(pen - spectral_majorizer(V, E), tr);
  }
  const double t = seconds_since(t0);
  o.expect(worst_exact <= 1e-10, "exactness at expansion");
  o.expect(worst_bound <= 1e-10, "one-sided bound");
  o.expect(t < 10.0, "runtime");
  o.detail << 3 * draws << " draws over 3 surrogates, worst exactness error " << worst_exact
           << ", worst bound excess " << worst_bound << ", " << t << " s (limit 10 s)";
}

void c3(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  int adaptive_bad = 0, dynamic_bad = 0, accepted = 0;
  double worst_drop = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SystemConfig c = small_config(3, 3, 8, 3, seed);
    const ChannelSet ch = synthesize_channels(c);
    const Solution a = solve_cluster_adaptive(c, ch);
    const auto& ta = a.diagnostics.objective_trace;
    for (std::size_t i = 1; i < ta.size(); ++i) {
      if (a.diagnostics.trace_round[i] != a.diagnostics.trace_round[i - 1]) continue;
      ++accepted;
      worst_drop = std::max(worst_drop, ta[i - 1] - ta[i]);
      if (ta[i] < ta[i - 1] - 1e-8) ++adaptive_bad;
    }
    for (int J : {2, 3}) {
      const Solution d = solve_dynamic(c, ch, J);
      const auto& td = d.diagnostics.objective_trace;
      for (std::size_t i = 1; i < td.size(); ++i) {
        ++accepted;
        worst_drop = std::max(worst_drop, td[i - 1] - td[i]);
        if (td[i] < td[i - 1] - 1e-8) ++dynamic_bad;
      }
      if (d.diagnostics.has_flag("nonmonotone_step")) ++dynamic_bad;
    }
  }
  const double t = seconds_since(t0);
  o.expect(adaptive_bad == 0, "cluster-adaptive trace");
  o.expect(dynamic_bad == 0, "dynamic trace");
  o.expect(t < 300.0, "runtime");
  o.detail << "20 seeds (L=3, N=8, K=3), " << accepted << " accepted iterations, decreases beyond 1e-8: adaptive "
           << adaptive_bad << ", dynamic " << dynamic_bad << ", largest drop " << worst_drop << ", " << t
           << " s (limit 300 s)";
}

void c4(Outcome& o) {
  int reached = 0;
  double worst_loss = -1e300, worst_residual = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SystemConfig c = small_config(3, 3, 8, 3, seed);
    const ChannelSet ch = synthesize_channels(c);
    const Solution a = solve_cluster_adaptive(c, ch);
    worst_residual = std::max(worst_residual, a.diagnostics.penalty_residual);
    if (a.diagnostics.penalty_residual > 1e-7) continue;
    ++reached;
    const double loss = 1.0 - a.objective / a.diagnostics.relaxed_objective;
    worst_loss = std::max(worst_loss, loss);
  }
  o.expect(reached >= 18, "residual target on 18 of 20 seeds");
  o.expect(worst_loss <= 0.01, "extraction loss");
  o.detail << "residual <= 1e-7 on " << reached << "/20 seeds (worst " << worst_residual
           << "), worst extraction loss " << worst_loss << " (limit 0.01)";
}

void c5(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  int violations = 0;
  std::vector<double> dyn, ada, split;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SystemConfig c = SystemConfig{};
    c.irs_elements = 20;
    c.seed = seed;
    const ChannelSet ch = synthesize_channels(c);
    const int L = c.clusters;
    const Solution d = solve_dynamic(c, ch, L);
    const Solution a = solve_cluster_adaptive(c, ch);
    const double ub = solve_upper_bound(c, ch).value;
    const double none = baseline_no_irs(c, ch).objective;
    const double rnd = baseline_random(c, ch, L).objective;
    if (none > d.objective) ++violations;
    if (rnd > d.objective) ++violations;
    if (a.objective > ub * (1 + 1e-9)) ++violations;
    if (d.objective > ub * (1 + 1e-9)) ++violations;
    dyn.push_back(d.objective);
    ada.push_back(a.objective);
    split.push_back(d.diagnostics.split_fraction);
  }
  const double ratio = mean(dyn) / mean(ada);
  const double t = seconds_since(t0);
  o.expect(violations == 0, "ordering on every instance");
  o.expect(ratio >= 0.95, "dynamic(J=L) vs cluster-adaptive mean");
  o.expect(t < 600.0, "runtime");
  o.detail << "20 seeds at N=20, ordering violations " << violations << ", mean dynamic(J=L)/cluster_adaptive "
           << ratio << " (limit 0.95), mean split fraction " << mean(split) << ", " << t << " s (limit 600 s)";
}

void c6(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepSpec spec;
  spec.axis = SweepAxis::N;
  spec.values = {10, 20, 30, 40};
  spec.trials = 20;
  spec.base_config = SystemConfig{};
  spec.base_config.pattern_budget = 3;
  spec.algorithms = {"dynamic", "random_bf", "no_irs"};
  const SweepResult r = run_sweep(spec);
  std::vector<double> dyn, gap;
  int failed = 0;
  for (double N : spec.values) {
    double d = 0.0, rb = 0.0;
    for (const auto& s : r.summary) {
      if (s.axis_value != N) continue;
      failed += s.failed;
      if (s.algorithm == "dynamic") d = s.mean_rate;
      if (s.algorithm == "random_bf") rb = s.mean_rate;
    }
    dyn.push_back(d);
    gap.push_back(d - rb);
  }
  bool increasing = true, widening = true;
  for (std::size_t i = 1; i < dyn.size(); ++i) {
    increasing = increasing && dyn[i] > dyn[i - 1];
    widening = widening && gap[i] > gap[i - 1];
  }
  o.expect(failed == 0, "no failed rows");
  o.expect(increasing, "dynamic mean strictly increasing in N");
  o.expect(widening, "gap over random_bf widening");
  o.detail << "L=5, J=3, 20 trials; mean dynamic rate";
  for (std::size_t i = 0; i < dyn.size(); ++i) o.detail << (i ? ", " : " ") << dyn[i];
  o.detail << "; gap over random_bf";
  for (std::size_t i = 0; i < gap.size(); ++i) o.detail << (i ? ", " : " ") << gap[i];
  o.detail << "; " << seconds_since(t0) << " s";
}

void c7(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> j5, j7, j10;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SystemConfig c = SystemConfig{};
    c.clusters = 10;
    c.irs_elements = 20;
    c.pattern_budget = 10;
    c.devices_per_cluster.assign(10, c.devices_per_cluster.front());
    c.noise_power.assign(10, c.noise_power.front());
    c.weights.assign(10, 1.0);
    c.seed = seed;
    const ChannelSet ch = synthesize_channels(c);
    j5.push_back(solve_dynamic(c, ch, 5).objective);
    j7.push_back(solve_dynamic(c, ch, 7).objective);
    j10.push_back(solve_dynamic(c, ch, 10).objective);
  }
  const double r5 = mean(j5) / mean(j10);
  const double r7 = mean(j7) / mean(j10);
  const double t = seconds_since(t0);
  o.expect(r5 >= 0.94, "J=5 at least 94% of J=10");
  o.expect(std::abs(1.0 - r7) <= 0.015, "J=7 within 1.5% of J=10");
  o.expect(t < 1800.0, "runtime");
  o.detail << "L=10, N=20, 20 trials; mean(J=5)/mean(J=10) " << r5 << " (limit 0.94), mean(J=7)/mean(J=10) " << r7
           << " (limit 1 +- 0.015), " << t << " s (limit 1800 s)";
}

void c8(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  SystemConfig c = small_config(2, 1, 2, 2, 1);
  const auto rows = oracle_check(c, 50, 8);
  int dyn_bad = 0, bound_bad = 0;
  double worst = 1e300;
  for (const auto& r : rows) {
    if (!r.dynamic_ok) ++dyn_bad;
    if (!r.bound_ok) ++bound_bad;
    worst = std::min(worst, r.dynamic / r.oracle);
  }
  const double t = seconds_since(t0);
  o.expect(rows.size() == 100, "row count");
  o.expect(dyn_bad == 0, "dynamic within 5% of the oracle");
  o.expect(bound_bad == 0, "oracle below the bound");
  o.expect(t < 300.0, "runtime");
  o.detail << "50 seeds x J in {1,2} (N=2, L=2, K=1, Q=8): dynamic below 0.95 oracle on " << dyn_bad
           << ", oracle above bound on " << bound_bad << ", worst dynamic/oracle " << worst << ", " << t
           << " s (limit 300 s)";
}

void c9(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream ratios;
  int within5 = 0, total = 0;
  for (int J : {2, 3, 5}) {
    std::vector<double> lc, dy;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      SystemConfig c = SystemConfig{};
      c.irs_elements = 20;
      c.pattern_budget = J;
      c.seed = seed;
      const ChannelSet ch = synthesize_channels(c);
      lc.push_back(solve_low_complexity(c, ch, J).objective);
      dy.push_back(solve_dynamic(c, ch, J).objective);
      ++total;
      if (lc.back() >= 0.95 * dy.back()) ++within5;
    }
    const double ratio = mean(lc) / mean(dy);
    o.expect(ratio >= 0.95, "mean ratio at J=" + std::to_string(J));
    ratios << (J == 2 ? "" : ", ") << "J=" << J << ": " << ratio;
  }

  double t_lc = 0.0, t_dy = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SystemConfig c = SystemConfig{};
    c.irs_elements = 40;
    c.pattern_budget = 3;
    c.seed = seed;
    const ChannelSet ch = synthesize_channels(c);
    auto t1 = std::chrono::steady_clock::now();
    solve_low_complexity(c, ch, 3);
    t_lc += seconds_since(t1);
    t1 = std::chrono::steady_clock::now();
    solve_dynamic(c, ch, 3);
    t_dy += seconds_since(t1);
  }
  o.expect(t_lc < t_dy, "wallclock at N=40");
  o.detail << "L=5, N=20, 20 seeds; mean low_complexity/dynamic " << ratios.str() << " (limit 0.95); per-seed within 5% on "
           << within5 << "/" << total << "; N=40 J=3 wallclock over 5 seeds: low_complexity " << t_lc << " s, dynamic "
           << t_dy << " s; " << seconds_since(t0) << " s";
}

struct Captured {
  int code = -1;
  std::string out;
};

Captured run_command(const std::string& cmd) {
  Captured r;
  FILE* p = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void c10(Outcome& o) {
  namespace fs = std::filesystem;
  const std::string cli = AIRCOMP_CLI_PATH;
  const fs::path dir = fs::temp_directory_path() / "aircomp_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);

  // simulate through the binary, twice
  const std::string sim = cli + " simulate --config " + AIRCOMP_CONFIG_DIR + "/scenario.json --seed 11";
  const Captured s1 = run_command(sim), s2 = run_command(sim);
  o.expect(s1.code == 0 && s2.code == 0, "simulate exit codes");
  o.expect(!s1.out.empty() && s1.out == s2.out, "simulate output identical");

  // sweep to files, serial then threaded
  const std::string sweep_cfg = std::string(AIRCOMP_CONFIG_DIR) + "/sweep_smoke.json";
  const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  const Captured w1 = run_command(cli + " sweep --config " + sweep_cfg + " --seed 7 --out " + a);
  const Captured w2 = run_command(cli + " sweep --config " + sweep_cfg + " --seed 7 --jobs 3 --out " + b);
  o.expect(w1.code == 0 && w2.code == 0, "sweep exit codes");
  const std::string fa = slurp(a), fb = slurp(b);
  o.expect(!fa.empty() && fa == fb, "sweep files identical");
  o.expect(slurp(a + ".summary.csv") == slurp(b + ".summary.csv"), "summary files identical");

  // and the in-process harness
  SweepSpec spec = load_sweep(sweep_cfg);
  spec.base_config.seed = 7;
  const std::string in_process = rows_to_csv(run_sweep(spec, 2).rows);
  o.expect(in_process == fa, "in-process sweep matches the CLI bytes");
  fs::remove_all(dir);
  o.detail << "simulate rerun (" << s1.out.size() << " bytes), sweep serial vs 3 jobs (" << fa.size()
           << " bytes) and in-process run_sweep: " << (o.pass ? "byte-identical" : "differences found");
}

const std::vector<std::function<void(Outcome&)>> kCriteria{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10};

bool run_criterion(int id) {
  Outcome o;
  try {
    kCriteria[static_cast<std::size_t>(id - 1)](o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.failures.push_back(std::string("exception: ") + e.what());
  }
  std::printf("criterion %d: %s %s", id, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
  if (!o.failures.empty()) {
    std::printf(" [failed:");
    for (const auto& f : o.failures) std::printf(" %s;", f.c_str());
    std::printf("]");
  }
  std::printf("\n");
  std::fflush(stdout);
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 2) {
    std::fprintf(stderr, "usage: %s [criterion 1-10]\n", argv[0]);
    return 2;
  }
  if (argc == 2) {
    const int id = std::atoi(argv[1]);
    if (id < 1 || id > 10) {
      std::fprintf(stderr, "criterion must be between 1 and 10\n");
      return 2;
    }
    return run_criterion(id) ? 0 : 1;
  }
  bool all = true;
  for (int id = 1; id <= 10; ++id) all = run_criterion(id) && all;
  return all ? 0 : 1;
}
