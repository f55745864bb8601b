#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "ptdw/continuation.hpp"
#include "ptdw/semiclassics.hpp"
#include "ptdw/verify.hpp"

namespace ptdw::cli {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json base_tolerances() {
  const PropagatorOptions p;
  const FindLevelOptions f;
  return {{"ode_tolerance", p.tolerance}, {"taylor_order", p.order}, {"level_tolerance", f.tolerance},
          {"zero_tolerance", ProblemSpec{}.zero_tolerance}};
}

struct ProblemArgs {
  std::string form = "H";
  double hbar = 1.0;
  std::string hbar_arg = "0";
  double alpha = 0.0;
  std::string alpha_arg = "0";

  void add(CLI::App* s) {
    s->add_option("--form", form, "H or K")->check(CLI::IsMember({"H", "K"}))->capture_default_str();
    s->add_option("--hbar", hbar, "|hbar| (H-form)")->capture_default_str();
    s->add_option("--hbar-arg", hbar_arg, "arg hbar, e.g. 10deg")->capture_default_str();
    s->add_option("--alpha", alpha, "alpha modulus with sign (K-form)")->capture_default_str();
    s->add_option("--alpha-arg", alpha_arg, "arg alpha, e.g. 170deg")->capture_default_str();
  }

  ProblemSpec spec() const {
    ProblemSpec s = form == "H" ? ProblemSpec::h_form(std::polar(hbar, parse_angle(hbar_arg)))
                                : ProblemSpec::k_form(alpha * std::exp(kI * parse_angle(alpha_arg)));
    s.validate();
    return s;
  }
};

struct StateArgs : ProblemArgs {
  double level_re = kNaN;
  double level_im = 0.0;
  int index = -1;
  int pert = -1;
  int sign = 1;
  int oracle_basis = 160;

  void add(CLI::App* s) {
    ProblemArgs::add(s);
    s->add_option("--level", level_re, "Re of an energy guess");
    s->add_option("--level-im", level_im, "Im of the energy guess")->capture_default_str();
    s->add_option("--index", index, "m-th oracle level (sorted by Re E)")->check(CLI::NonNegativeNumber);
    s->add_option("--pert", pert, "perturbative branch n at real hbar (H-form)")->check(CLI::NonNegativeNumber);
    s->add_option("--sign", sign, "branch sign for --pert")->check(CLI::IsMember({-1, 1}))->capture_default_str();
    s->add_option("--oracle-basis", oracle_basis, "basis size for --index")->capture_default_str();
  }

  Eigenpair resolve() const {
    const ProblemSpec s = spec();
    if (!std::isnan(level_re)) return find_level(cplx(level_re, level_im), s);
    if (pert >= 0) {
      if (s.form != Form::H || s.hbar.imag() != 0.0) throw UsageError("--pert needs the H-form at real hbar");
      const ComplexEnergy g = wkb_level(pert, s.hbar.real(), sign);
      Eigenpair p = find_level(g.value, s);
      p.energy.branch = g.branch;
      return p;
    }
    if (index >= 0) {
      const OracleResult o = oracle_spectrum(s, oracle_basis);
      if (index >= int(o.levels.size())) throw UsageError("--index beyond the certified oracle levels");
      Eigenpair p = find_level(o.levels[size_t(index)].value, s);
      p.energy.branch = BranchLabel::large_hbar(index);
      return p;
    }
    throw UsageError("choose a state with --level, --pert or --index");
  }
};

json level_json(const Eigenpair& p) {
  return {{"E", to_json(p.energy.value)}, {"branch", p.energy.branch.str()}, {"problem", p.spec.describe()},
          {"mismatch", p.mismatch}, {"iterations", p.iterations}};
}

std::ofstream open_csv(RunContext& ctx, const std::string& name) {
  std::ofstream f(ctx.file(name));
  if (!f) throw UsageError("cannot write " + name);
  f << std::setprecision(17);
  return f;
}

// ---------------------------------------------------------------------------------------

class SpectrumCommand : public Command {
 public:
  CLI::App* attach(CLI::App& app) override {
    auto* s = app.add_subcommand("spectrum", "Levels inside a box of the energy plane, cross-checked by the oracle");
    problem_.add(s);
    s->add_option("--emin", re_min, "Re E lower edge")->capture_default_str();
    s->add_option("--emax", re_max, "Re E upper edge")->capture_default_str();
    s->add_option("--im-min", im_min)->capture_default_str();
    s->add_option("--im-max", im_max)->capture_default_str();
    s->add_option("--oracle-basis", basis, "dense basis size (0 disables the cross-check)")->capture_default_str();
    return s;
  }

  void run(RunContext& ctx) override {
    const ProblemSpec spec = problem_.spec();
    if (!(re_max > re_min) || !(im_max > im_min)) throw UsageError("empty energy box");
    ctx.tolerances() = base_tolerances();
    ctx.tolerances()["oracle_match_reject"] = 0.1;
    const Rect box{re_min, re_max, im_min, im_max};
    const ScanResult scan = scan_spectrum(box, spec);
    std::vector<cplx> ours, oracle;
    for (const auto& l : scan.levels) ours.push_back(l.value);
    if (basis > 0) {
      for (const auto& l : oracle_spectrum(spec, basis).levels) {
        if (box.contains(l.value)) oracle.push_back(l.value);
      }
    }
    std::vector<int> match(ours.size(), -1);
    for (auto [a, b] : match_levels(ours, oracle)) match[size_t(a)] = b;

    auto f = open_csv(ctx, "levels.csv");
    f << "index,re,im,oracle_re,oracle_im,oracle_diff\n";
    double max_diff = 0.0;
    int unmatched = 0;
    bool real_positive = true;
    for (size_t i = 0; i < ours.size(); ++i) {
      f << i << ',' << ours[i].real() << ',' << ours[i].imag() << ',';
      if (match[i] >= 0) {
        const cplx o = oracle[size_t(match[i])];
        const double d = std::abs(o - ours[i]);
        max_diff = std::max(max_diff, d);
        f << o.real() << ',' << o.imag() << ',' << d << '\n';
      } else {
        ++unmatched;
        f << ",,\n";
      }
      real_positive = real_positive && std::abs(ours[i].imag()) < 1e-8 && ours[i].real() > 0;
    }
    ctx.write_json("spectrum.json", {{"problem", spec.describe()},
                                     {"region", {re_min, re_max, im_min, im_max}},
                                     {"count", ours.size()},
                                     {"total_winding", scan.total_winding},
                                     {"oracle_levels_in_box", oracle.size()},
                                     {"unmatched", unmatched},
                                     {"max_oracle_diff", max_diff},
                                     {"all_real_positive", real_positive}});
    std::printf("%zu levels (winding %d), max oracle difference %.3g\n", ours.size(), scan.total_winding, max_diff);
  }

 private:
  ProblemArgs problem_;
  double re_min = -0.5, re_max = 12.0, im_min = -1.0, im_max = 1.0;
  int basis = 160;
};

// ---------------------------------------------------------------------------------------

class TraceCommand : public Command {
 public:
  CLI::App* attach(CLI::App& app) override {
    auto* s = app.add_subcommand("trace", "Continue a level along a parameter path");
    state_.add(s);
    s->add_option("--to", to_re, "line path end (hbar or alpha, real part)");
    s->add_option("--to-im", to_im, "line path end, imaginary part")->capture_default_str();
    s->add_option("--circle", circle, "hbar circle: centre radius arg_start arg_end (radians)")->expected(4);
    s->add_option("--alpha-arc", arc_sign, "K-form arc |alpha| = hbar^(-4/5) from arg 0 to sign*pi")
        ->check(CLI::IsMember({-1, 1}));
    s->add_option("--node-every", node_every, "node census every k-th step")->capture_default_str();
    s->add_option("--initial-step", options_.initial_step)->capture_default_str();
    s->add_option("--max-step", options_.max_step)->capture_default_str();
    s->add_option("--trust-cap", options_.trust_cap)->capture_default_str();
    s->add_option("--detect-crossing", crossing_n, "locate h_n for this n instead of tracing a state")
        ->check(CLI::NonNegativeNumber);
    s->add_option("--monodromy-radius", monodromy_radius, "also run the loop checks around h_n");
    return s;
  }

  void run(RunContext& ctx) override {
    ctx.tolerances() = base_tolerances();
    if (crossing_n >= 0) return run_crossing(ctx);

    const Eigenpair start = state_.resolve();
    const int kinds = int(!std::isnan(to_re)) + int(!circle.empty()) + int(arc_sign != 0);
    if (kinds != 1) throw UsageError("give exactly one of --to, --circle, --alpha-arc");
    ParameterPath path;
    const cplx p0 = start.spec.form == Form::H ? start.spec.hbar : start.spec.alpha;
    const auto kind = start.spec.form == Form::H ? ParameterPath::Kind::Hbar : ParameterPath::Kind::Alpha;
    double arc_hbar = 0.0;
    if (!std::isnan(to_re)) {
      path = ParameterPath(kind);
      path.line_to(p0, cplx(to_re, to_im));
    } else if (!circle.empty()) {
      if (kind != ParameterPath::Kind::Hbar) throw UsageError("--circle is an hbar path");
      path = hbar_circle(circle[0], circle[1], circle[2], circle[3]);
    } else {
      if (kind != ParameterPath::Kind::Alpha) throw UsageError("--alpha-arc is a K-form path");
      arc_hbar = std::pow(std::abs(p0), -5.0 / 4.0);
      path = continuation_path_alpha(arc_hbar, arc_sign);
    }
    TraceOptions o = options_;
    o.node_every = node_every;
    ctx.tolerances()["trust_fraction"] = o.trust_fraction;
    ctx.tolerances()["min_step"] = o.min_step;
    const BranchTrace tr = trace_level(start, path, o);
    write_trace_csv(ctx.file("trace.csv").string(), tr);

    json ann = {{"start", level_json(start)},
                {"end", to_json(tr.back().energy.value)},
                {"end_param", to_json(tr.back().param)},
                {"steps_accepted", tr.steps_accepted},
                {"steps_halved", tr.steps_halved},
                {"steps_quartered", tr.steps_quartered},
                {"truncated", tr.truncated},
                {"diagnostic", tr.diagnostic}};
    if (arc_hbar > 0.0 && !tr.truncated) {
      // end of the arc: alpha = -hbar^(-4/5), so hbar^(6/5) E is a level of H at hbar
      const cplx scaled = std::pow(arc_hbar, 1.2) * tr.back().energy.value;
      const Eigenpair h = find_level(scaled, ProblemSpec::h_form(arc_hbar));
      ann["scaling_check"] = {{"hbar", arc_hbar},
                              {"scaled_end", to_json(scaled)},
                              {"h_form_level", to_json(h.energy.value)},
                              {"difference", std::abs(h.energy.value - scaled)}};
    }
    ctx.write_json("annotations.json", ann);
    if (tr.truncated) throw NumericalError(NumericalError::Kind::TraceTruncated, tr.diagnostic);
    std::printf("trace: %d steps, end E = %.12g %+.12gi\n", tr.steps_accepted, tr.back().energy.value.real(),
                tr.back().energy.value.imag());
  }

 private:
  void run_crossing(RunContext& ctx) {
    const CrossingOptions co;
    ctx.tolerances()["crossing_tolerance"] = co.tolerance;
    const CrossingRecord c = find_crossing(crossing_n, co);
    json crit = json::array();
    for (const cplx& z : c.critical_node_set) crit.push_back(to_json(z));
    json rec = {{"n", c.n},
                {"h_n", c.h_n},
                {"E_c", c.E_c},
                {"h_from_below", c.h_from_below},
                {"h_from_above", c.h_from_above},
                {"sqrt_exponent_fit", c.sqrt_exponent_fit},
                {"sqrt_exponent_fit_below", c.sqrt_exponent_fit_below},
                {"newton", {{"converged", c.newton_converged}, {"h", c.h_newton}, {"E", c.E_newton}}},
                {"critical_node_set", crit},
                {"critical_set_symmetric", c.critical_set_symmetric},
                {"nodes_below", {c.nodes_below_plus, c.nodes_below_minus}},
                {"nodes_above", {c.nodes_above_even, c.nodes_above_odd}},
                {"bookkeeping_ok", c.bookkeeping_ok},
                {"notes", c.notes}};
    if (monodromy_radius > 0.0) {
      const MonodromyReport m = monodromy_check(c, monodromy_radius);
      json paths = json::array();
      for (const auto& p : m.paths) {
        paths.push_back({{"name", p.name},
                         {"start", to_json(p.start_energy)},
                         {"end", to_json(p.end_energy)},
                         {"expected", to_json(p.expected)},
                         {"mismatch", p.mismatch},
                         {"ok", p.ok}});
      }
      rec["monodromy"] = {{"radius", m.radius}, {"ok", m.ok}, {"paths", paths}};
    }
    ctx.write_json("crossing.json", rec);
    ctx.write_json("annotations.json",
                   {{"annotations", {{{"kind", "crossing"}, {"hbar", c.h_n}, {"energy", c.E_c}, {"n", c.n}}}}});
    std::printf("h_%d = %.10f, E_c = %.10f\n", c.n, c.h_n, c.E_c);
  }

  StateArgs state_;
  double to_re = kNaN, to_im = 0.0;
  std::vector<double> circle;
  int arc_sign = 0;
  int node_every = 0;
  TraceOptions options_;
  int crossing_n = -1;
  double monodromy_radius = 0.0;
};

// ---------------------------------------------------------------------------------------

class Table1Command : public Command {
 public:
  CLI::App* attach(CLI::App& app) override {
    auto* s = app.add_subcommand("table1", "hbar at which psi_{2n+1} acquires its imaginary node");
    s->add_option("--n", ns, "values of n")->check(CLI::NonNegativeNumber)->capture_default_str();
    s->add_option("--tolerance", options_.tolerance, "hbar bracket width")->capture_default_str();
    return s;
  }

  void run(RunContext& ctx) override {
    ctx.tolerances() = base_tolerances();
    ctx.tolerances()["hbar_bracket"] = options_.tolerance;
    std::vector<NodeBirthRecord> rows(ns.size());
    parallel_for(int(ns.size()), ctx.workers(), [&](int i) { rows[size_t(i)] = find_node_birth(ns[size_t(i)], options_); });
    auto f = open_csv(ctx, "table1.csv");
    f << "n,level,h_p,E_p,bracket_lo,bracket_hi,y_star,y_tilde,complex_pairs,evaluations\n";
    json out = json::array();
    for (const auto& r : rows) {
      f << r.n << ',' << r.level << ',' << r.h_p << ',' << r.E_p << ',' << r.bracket_lo << ',' << r.bracket_hi << ','
        << r.y_star << ',' << r.y_tilde << ',' << r.complex_pairs << ',' << r.evaluations << '\n';
      out.push_back({{"n", r.n},
                     {"level", r.level},
                     {"h_p", r.h_p},
                     {"E_p", r.E_p},
                     {"bracket", {r.bracket_lo, r.bracket_hi}},
                     {"y_star", r.y_star},
                     {"y_tilde", r.y_tilde},
                     {"complex_pairs", r.complex_pairs},
                     {"notes", r.notes}});
      std::printf("n=%d  h_p=%.6f  E_p=%.6f\n", r.n, r.h_p, r.E_p);
    }
    ctx.write_json("table1.json", out);
  }

 private:
  std::vector<int> ns{8, 9, 10, 11};
  NodeBirthOptions options_;
};

// ---------------------------------------------------------------------------------------

class StokesCommand : public Command {
 public:
  CLI::App* attach(CLI::App& app) override {
    auto* s = app.add_subcommand("stokes", "Stokes diagram of the H-form at real E, or the critical energy E^p");
    s->add_option("--energy", energy, "real E > 0");
    s->add_flag("--find-ep", find_ep, "locate E^p");
    s->add_option("--box", options_.box)->capture_default_str();
    s->add_option("--step", options_.step)->capture_default_str();
    return s;
  }

  void run(RunContext& ctx) override {
    if (std::isnan(energy) && !find_ep) throw UsageError("give --energy or --find-ep");
    if (!std::isnan(energy) && !(energy > 0.0)) throw UsageError("--energy must be positive");
    ctx.tolerances() = {{"step", options_.step}, {"capture_distance", options_.capture_distance}};
    const ProblemSpec spec = ProblemSpec::h_form(1.0);
    if (!std::isnan(energy)) {
      const StokesDiagram d = trace_stokes(energy, spec, options_);
      write_stokes_csv(ctx.file("stokes.csv").string(), d);
      json curves = json::array();
      for (const auto& c : d.curves) {
        curves.push_back({{"source", to_json(c.source)},
                          {"direction", c.direction},
                          {"points", c.points.size()},
                          {"end", c.end == StokesCurve::End::TurningPoint ? "turning_point"
                                  : c.end == StokesCurve::End::LeftBox  ? "left_box"
                                                                        : "step_limit"},
                          {"end_point", to_json(c.end_point)},
                          {"max_residual", c.max_residual}});
      }
      json tp = json::array();
      for (const cplx& t : d.turning.roots) tp.push_back(to_json(t));
      ctx.write_json("stokes.json", {{"E", d.E},
                                     {"convention", d.convention},
                                     {"turning_points", tp},
                                     {"short_line", to_string(d.short_line)},
                                     {"i0_offset", d.i0_offset},
                                     {"curves", curves}});
      std::printf("E=%g: short line %s, I0 offset %.3e\n", d.E, to_string(d.short_line), d.i0_offset);
    }
    if (find_ep) {
      const EpResult ep = find_Ep(0.2, 0.5, options_);
      ctx.write_json("ep.json", {{"E_p", ep.E},
                                 {"offset", ep.offset},
                                 {"iterations", ep.iterations},
                                 {"integral_residual", ep.integral_residual},
                                 {"convention", "stokes = integral real"}});
      std::printf("E^p = %.10f\n", ep.E);
    }
  }

 private:
  double energy = kNaN;
  bool find_ep = false;
  StokesOptions options_;
};

// ---------------------------------------------------------------------------------------

class VerifyCommand : public Command {
 public:
  CLI::App* attach(CLI::App& app) override {
    auto* s = app.add_subcommand("verify", "Flux identity, PT gauge, P-overlap and zero-exclusion checks on a state");
    state_.add(s);
    return s;
  }

  void run(RunContext& ctx) override {
    ctx.tolerances() = base_tolerances();
    ctx.tolerances()["flux_relative"] = 1e-7;
    ctx.tolerances()["gauge_imag_ratio"] = 1e-8;
    ctx.tolerances()["axis_min_over_median"] = 1e-6;
    const Eigenpair pair = state_.resolve();
    const ProblemSpec& spec = pair.spec;
    const cplx E = pair.energy.value;
    const bool real_level = std::abs(E.imag()) <= 1e-10 * std::max(1.0, std::abs(E));
    const cplx param = spec.form == Form::H ? spec.hbar : spec.alpha;
    const bool real_param = param.imag() == 0.0;

    json rep = {{"state", level_json(pair)}};
    bool ok = true;
    if (spec.kinetic().imag() == 0.0) {
      const FluxReport f = axis_flux_identity(pair);
      write_flux_csv(ctx.file("flux.csv").string(), f);
      const bool pass = f.trivial || f.relative_residual < 1e-7;
      ok = ok && pass;
      rep["flux_identity"] = {{"base", f.base},
                              {"relative_residual", f.relative_residual},
                              {"trivial", f.trivial},
                              {"min_abs_phi", f.min_abs_phi},
                              {"median_abs_phi", f.median_abs_phi},
                              {"pass", pass}};
    }
    if (real_level && real_param) {
      GaugeReport g1, g2;
      const Eigenpair gauged = pt_gauge(pair, &g1);
      const Eigenpair again = pt_gauge(gauged, &g2);
      const cplx ratio = std::exp(again.log_gauge - gauged.log_gauge);
      const bool pass = g1.max_imag_ratio < 1e-8;
      ok = ok && pass;
      rep["pt_gauge"] = {{"anchor_y", g1.anchor_y},
                         {"anchor_shifted", g1.anchor_shifted},
                         {"max_imag_ratio", g1.max_imag_ratio},
                         {"max_symmetry_error", g1.max_symmetry_error},
                         {"idempotence_error", std::abs(ratio - 1.0)},
                         {"pass", pass}};
      const OverlapResult ov = p_overlap(gauged);
      rep["p_overlap"] = {{"value", to_json(ov.value)}, {"abs", std::abs(ov.value)}, {"cut", ov.cut},
                          {"tail_mismatch", ov.tail_mismatch}};
      if (spec.form == Form::K && spec.alpha.real() >= 0.0) {
        json lines = json::array();
        bool wok = true;
        for (double x : {1.0, -1.0}) {
          const WedgeFluxReport w = wedge_flux_sign(pair, x, {-0.5, -0.25, 0.0, 0.25, 0.5});
          wok = wok && w.ok;
          for (const auto& l : w.lines) {
            lines.push_back({{"x", x}, {"y", l.y}, {"flux", l.flux}, {"one_sided_integral", l.integral},
                             {"residual", l.residual}, {"sign_ok", l.sign_ok}});
          }
        }
        ok = ok && wok;
        rep["wedge_flux"] = {{"lines", lines}, {"pass", wok}};
      }
    }
    if (!real_level) {
      const ZeroCheckReport axis = check_zero_free_axis(pair);
      ok = ok && axis.ok;
      rep["zero_free_axis"] = {{"log_min_over_median", axis.value}, {"detail", axis.detail}, {"pass", axis.ok}};
      const Eigenpair partner = find_level(std::conj(E), spec);
      rep["pxt_pair"] = {{"partner", to_json(partner.energy.value)},
                         {"ratio_spread", pxt_pair_mismatch(pair, partner)}};
    }
    rep["pass"] = ok;
    ctx.write_json("verify.json", rep);
    std::printf("verify: %s\n", ok ? "pass" : "FAIL");
    if (!ok) throw NumericalError(NumericalError::Kind::Other, "verification failed; see verify.json");
  }

 private:
  StateArgs state_;
};

// ---------------------------------------------------------------------------------------

class ZerosCommand : public Command {
 public:
  CLI::App* attach(CLI::App& app) override {
    auto* s = app.add_subcommand("zeros", "Zero census of a state");
    state_.add(s);
    s->add_option("--region", region, "re_min re_max im_min im_max")->expected(4);
    return s;
  }

  void run(RunContext& ctx) override {
    ctx.tolerances() = base_tolerances();
    ctx.tolerances()["confinement_margin"] = 0.02;
    const Eigenpair pair = state_.resolve();
    const Rect r = region.empty() ? default_zero_region(pair) : Rect{region[0], region[1], region[2], region[3]};
    std::vector<ZeroRecord> zeros = locate_zeros(pair, r);
    const NodeSummary sum = classify_zeros(zeros, pair.energy.value, pair.spec);
    const cplx param = pair.spec.form == Form::H ? pair.spec.hbar : pair.spec.alpha;
    write_zero_csv(ctx.file("zeros.csv").string(), zeros, pair.energy.branch.str(), std::abs(param));
    json rep = {{"state", level_json(pair)},
                {"region", {r.re_min, r.re_max, r.im_min, r.im_max}},
                {"zeros", zeros.size()},
                {"n_plus", sum.n_plus},
                {"n_minus", sum.n_minus},
                {"imaginary_node", sum.has_imaginary_node},
                {"far_zeros", sum.far_zeros}};
    if (pair.spec.form == Form::K && param.imag() == 0.0 && param.real() >= 0.0) {
      const ZeroCheckReport c = check_confinement(zeros, pair.spec);
      rep["confinement"] = {{"ok", c.ok}, {"min_margin", c.min_margin}, {"violations", c.violations}};
    }
    ctx.write_json("zeros.json", rep);
    std::printf("%zu zeros: %d in C+, %d in C-, imaginary node %s, %d far\n", zeros.size(), sum.n_plus, sum.n_minus,
                sum.has_imaginary_node ? "yes" : "no", sum.far_zeros);
  }

 private:
  StateArgs state_;
  std::vector<double> region;
};

}  // namespace

double parse_angle(const std::string& text) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("bad angle '" + text + "'");
  }
  const std::string unit = text.substr(used);
  if (unit.empty() || unit == "rad") return v;
  if (unit == "deg") return v * kPi / 180.0;
  throw UsageError("bad angle unit in '" + text + "'");
}

std::vector<std::unique_ptr<Command>> make_commands() {
  std::vector<std::unique_ptr<Command>> c;
  c.push_back(std::make_unique<SpectrumCommand>());
  c.push_back(std::make_unique<TraceCommand>());
  c.push_back(std::make_unique<Table1Command>());
  c.push_back(std::make_unique<StokesCommand>());
  c.push_back(std::make_unique<VerifyCommand>());
  c.push_back(std::make_unique<ZerosCommand>());
  return c;
}

}  // namespace ptdw::cli
