#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "lifshitz/anderson.hpp"
#include "lifshitz/census.hpp"
#include "lifshitz/cli.hpp"
#include "lifshitz/diagram_values.hpp"
#include "lifshitz/dispersion.hpp"
#include "lifshitz/expansion.hpp"
#include "lifshitz/feynman_graph.hpp"
#include "lifshitz/lattice_green.hpp"
#include "lifshitz/partitions.hpp"

namespace lifshitz::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Sink {
  fs::path dir;
  std::vector<std::string>& outputs;

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir / name);
    if (!f) throw Error(fmt::format("cannot write {}", (dir / name).string()));
    outputs.push_back(name);
    return f;
  }
  void write(const std::string& name, const std::string& text) { open(name) << text; }
  void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << "\n"; }
};

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int positive_int(const Config& c, const std::string& key) {
  long long v = c.integer(key);
  if (v < 1) throw ConfigError(fmt::format("key '{}' must be >= 1", key));
  return int(v);
}

json tolerances_for(const std::string& command) {
  if (command == "selfenergy") return {{"quadrature", 1e-12}, {"fixed_point", 1e-10}};
  if (command == "green") return {{"bessel_rel_tol", 1e-10}, {"fft_periodization", 1e-8}};
  if (command == "diagrams") return {{"exact", true}};
  if (command == "diagram-value") return {{"mc_standard_errors", 3}};
  if (command == "expand-verify")
    return {{"identity_residual", 1e-9}, {"moment_truncation", 0.05}, {"moment_z", 3}};
  if (command == "fracmom") return {{"resolvent_residual", 1e-10}, {"eta_spread", 0.2}};
  if (command == "criterion") return {{"resolvent_residual", 1e-10}};
  return json::object();
}

json cmd_selfenergy(const Config& c, Sink& out, std::ostream& log) {
  double lambda = c.real("lambda"), epsilon = c.real("epsilon");
  int points = positive_int(c, "points");
  double lo = threshold_E_eps(lambda, epsilon);
  double hi = lambda * lambda * lattice_constant() + lambda;
  if (!(hi > lo)) throw DomainError("empty admissible energy window");
  auto f = out.open("selfenergy.csv");
  f << "E,estar,sigma,fixed_point_residual,roundtrip_error\n";
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    double E = lo + (i + 0.5) / points * (hi - lo);
    EnergyContext ctx = solve_self_energy(E, lambda, epsilon);
    double rt = std::abs(energy_of_estar(ctx.estar, lambda) - E);
    worst = std::max({worst, ctx.fixed_point_residual(), rt});
    f << fmt::format("{:.17g},{:.17g},{:.17g},{:.3e},{:.3e}\n", E, ctx.estar, ctx.sigma,
                     ctx.fixed_point_residual(), rt);
  }
  log << fmt::format("selfenergy: {} energies in [{:.6g}, {:.6g}], worst residual {:.2e}\n", points,
                     lo, hi, worst);
  return {{"lambda", lambda}, {"epsilon", epsilon}, {"E_threshold", lo}, {"E_upper", hi},
          {"I1_zero", lattice_constant()}, {"worst_residual", worst}};
}

json cmd_green(const Config& c, Sink& out, std::ostream& log) {
  double estar = c.real("estar");
  int radius = positive_int(c, "radius");
  const std::string& method = c.text("method");
  if (method != "bessel" && method != "fft") throw ConfigError("method must be bessel or fft");
  GreenTableOptions go;
  go.rel_tol = c.real("rel_tol");
  go.threads = positive_int(c, "threads");
  GreenTable table = method == "bessel" ? build_green_table(estar, radius, go)
                                        : green_free_fft(positive_int(c, "grid"), estar, radius);
  {
    auto f = out.open("green_table.csv");
    table.write_csv(f);
  }
  json s{{"estar", estar},
         {"radius", radius},
         {"method", to_string(table.method())},
         {"G0", table({0, 0, 0})},
         {"identity_residual", resolvent_identity_residual(table, radius)}};
  if (double lambda = c.real("lambda"); lambda > 0) {
    EnergyContext ctx = context_from_estar(estar, lambda);
    s["sigma"] = ctx.sigma;
    s["sigma_identity_rel_error"] = std::abs(lambda * lambda * table({0, 0, 0}) - ctx.sigma) / ctx.sigma;
  }
  if (c.flag("asymptotics")) {
    AsymptoticsReport a = check_asymptotics(int(c.integer("r_min")), int(c.integer("r_max")), estar);
    auto f = out.open("asymptotics.csv");
    f << "r,value,prefactor_ratio\n";
    for (std::size_t i = 0; i < a.distances.size(); ++i)
      f << fmt::format("{},{:.17g},{:.17g}\n", a.distances[i], a.values[i], a.ratios[i]);
    s["asymptotics"] = {{"fitted_rate", a.fitted_rate}, {"continuum_rate", a.continuum_rate},
                        {"rate_ratio", a.rate_ratio},   {"ratio_min", a.ratio_min},
                        {"ratio_max", a.ratio_max},     {"c1", a.c1},
                        {"c2", a.c2},                   {"envelope_K", a.envelope_K}};
  }
  log << fmt::format("green: {} table, radius {}, G(0) = {:.15g}\n", method, radius, table({0, 0, 0}));
  return s;
}

json cmd_diagrams(const Config& c, Sink& out, std::ostream& log) {
  int n = positive_int(c, "n");
  EnumerationOptions eo;
  eo.gate_free = c.flag("gate_free");
  eo.pairings_only = c.flag("pairings_only");
  double eps = c.real("eps");
  json list = json::array();
  int convergent = 0, total = 0;
  for (const Partition& p : enumerate_partitions(IndexSet::upsilon(n, n), eo)) {
    CensusReport r = classify_superficial_convergence(FeynmanGraph::from_partition(p, n), eps);
    list.push_back(r.to_json());
    convergent += r.superficially_convergent;
    ++total;
  }
  out.write_json("census.json", {{"n", n},
                                 {"gate_free", eo.gate_free},
                                 {"pairings_only", eo.pairings_only},
                                 {"eps", eps},
                                 {"partitions", list}});
  log << fmt::format("diagrams: n={} partitions={} superficially convergent={}\n", n, total, convergent);
  return {{"n", n}, {"partitions", total}, {"superficially_convergent", convergent}};
}

json cmd_diagram_value(const Config& c, Sink& out, std::ostream& log) {
  int n = positive_int(c, "n");
  double estar = c.real("estar");
  const std::string& kind = c.text("kind");
  if (kind != "torus" && kind != "continuum") throw ConfigError("kind must be torus or continuum");
  McParams mc;
  mc.samples = std::uint64_t(positive_int(c, "samples"));
  mc.seed = std::uint64_t(c.integer("seed"));
  mc.threads = positive_int(c, "threads");
  double cutoff = c.real("cutoff");

  std::vector<Partition> parts;
  if (c.text("partition").empty()) {
    EnumerationOptions eo;
    eo.pairings_only = true;
    eo.gate_free = true;
    parts = enumerate_partitions(IndexSet::upsilon(n, n), eo);
  } else {
    parts.push_back(parse_partition(c.text("partition")));
  }
  auto value = [&](const Partition& p, double e) {
    return kind == "torus" ? torus_pairing_integral(p, e, mc) : continuum_pairing_integral(p, e, mc, cutoff);
  };
  auto f = out.open("diagram_values.csv");
  f << "partition,estar,value,stderr,samples,seed,method\n";
  json rows = json::array();
  for (const Partition& p : parts) {
    std::vector<double> energies{estar};
    if (c.flag("scaling")) energies.push_back(2 * estar);
    std::vector<GraphValueEstimate> est;
    for (double e : energies) {
      est.push_back(value(p, e));
      const auto& g = est.back();
      f << fmt::format("\"{}\",{:.17g},{:.17g},{:.6g},{},{},{}\n", p.to_string(), e, g.value, g.stderr_,
                       g.samples, g.seed, g.method);
    }
    json row{{"partition", p.to_string()}, {"value", est[0].value}, {"stderr", est[0].stderr_}};
    if (est.size() == 2) {
      double ratio = est[0].value / est[1].value;
      double rel = std::hypot(est[0].stderr_ / est[0].value, est[1].stderr_ / est[1].value);
      row["scaling_ratio"] = ratio;
      row["scaling_ratio_stderr"] = ratio * rel;
      row["expected_ratio"] = std::pow(2.0, n / 2.0 - 1.0);
    }
    rows.push_back(row);
  }
  json s{{"n", n}, {"estar", estar}, {"kind", kind}, {"rows", rows}};
  try {
    BoundAssembly b = assemble_An_bound(n, c.real("lambda"), estar);
    s["bound"] = {{"rho", b.rho}, {"log_bound", b.log_bound}, {"chosen_N", b.chosen_N}};
  } catch (const Error& e) {
    s["bound"] = {{"note", e.what()}};
  }
  log << fmt::format("diagram-value: {} {} integrals at E*={}\n", parts.size(), kind, estar);
  return s;
}

json cmd_expand_verify(const Config& c, Sink& out, std::ostream& log) {
  int N = positive_int(c, "N");
  int side = positive_int(c, "box");
  double lambda = c.real("lambda"), estar = c.real("estar"), eta = c.real("eta");
  int seeds = positive_int(c, "seeds");
  std::uint64_t root = std::uint64_t(c.integer("seed"));
  if (side < 3) throw ConfigError("box must be >= 3");

  Decomposition dec = generate_terms(N);
  if (!(dec.all() == generate_terms_direct(N).all()))
    throw NumericalError("term generators disagree", 0.0);
  out.write(fmt::format("terms_N{}.txt", N), dec.to_table());

  Box box = Box::cube(side);
  Site x{side / 4, side / 2, side / 2}, y{(3 * side) / 4, side / 2, side / 2 - 1};
  EnergyContext ctx = context_from_estar(estar, lambda);
  auto f = out.open("expand_residuals.csv");
  f << "sample,N,residual,column_norm,terms\n";
  double worst = 0.0;
  for (int s = 0; s < seeds; ++s) {
    auto v = sample_potential(box, DensitySpec{}, root, std::uint64_t(s));
    DecompositionResidual r = evaluate_decomposition(box, v, ctx, x, y, N, eta);
    worst = std::max(worst, r.residual);
    f << fmt::format("{},{},{:.3e},{:.6g},{}\n", s, N, r.residual, r.column_norm, r.terms);
  }
  json s{{"N", N},         {"box", side},           {"lambda", lambda},
         {"estar", estar}, {"explicit_terms", dec.explicit_terms.size()},
         {"remainder_terms", dec.remainder_terms.size()},
         {"worst_residual", worst}, {"pass", worst < 1e-9}};
  if (int l = int(c.integer("moment_l")); l != 0) {
    MomentOptions mo;
    mo.samples = std::uint64_t(positive_int(c, "moment_samples"));
    mo.seed = root;
    mo.region_radius = c.real("region_radius");
    mo.threads = positive_int(c, "threads");
    Site a{0, 0, 0}, b{2, 0, 0};
    int need = int(std::ceil(norm(b - a) + 2 * (mo.region_radius + 1))) + 1;
    GreenTable table = build_green_table(estar, need);
    MomentComparison m = mc_moment_Al_squared(l, ctx, table, a, b, mo);
    s["moment"] = {{"l", l},
                   {"mc_mean", m.mc_mean},
                   {"mc_stderr", m.mc_stderr},
                   {"diagram_sum", m.diagram_sum},
                   {"z_score", m.z_score},
                   {"truncation", m.truncation_estimate},
                   {"region_sites", m.region_sites}};
  }
  log << fmt::format("expand-verify: N={} worst residual {:.2e} over {} samples\n", N, worst, seeds);
  return s;
}

json cmd_fracmom(const Config& c, Sink& out, std::ostream& log) {
  int side = positive_int(c, "box");
  double lambda = c.real("lambda"), estar = c.real("estar"), s = c.real("s");
  auto distances = c.integers("distances");
  int dmax = 0;
  for (int d : distances) {
    if (d < 1) throw ConfigError("distances must be >= 1");
    dmax = std::max(dmax, d);
  }
  if (dmax >= side) throw ConfigError("largest distance must be below the box side");
  Box box = Box::cube(side);
  Site anchor{(side - 1 - dmax) / 2, side / 2, side / 2};
  std::vector<SitePair> pairs;
  for (int d : distances) pairs.push_back({anchor, {anchor[0] + d, anchor[1], anchor[2]}});

  FractionalMomentOptions fo;
  fo.samples = std::uint64_t(positive_int(c, "samples"));
  fo.eta_schedule = c.reals("etas");
  fo.seed = std::uint64_t(c.integer("seed"));
  fo.density = DensitySpec::from_name(c.text("density"));
  fo.threads = positive_int(c, "threads");
  EnergyContext ctx = context_from_estar(estar, lambda);

  const std::string& mode = c.text("mode");
  if (mode != "moment" && mode != "difference") throw ConfigError("mode must be moment or difference");
  json summary{{"box", side}, {"lambda", lambda}, {"estar", estar}, {"energy", ctx.energy}, {"s", s}};
  FractionalMomentEstimate est;
  if (mode == "difference") {
    MomentDifferenceReport rep = moment_difference(box, ctx, s, pairs, fo);
    est = rep.estimate;
    summary["fitted_C1"] = rep.fitted_C1;
    summary["notices"] = rep.notices;
  } else {
    est = fractional_moment(box, ctx, s, pairs, fo);
  }
  auto f = out.open("fracmom.csv");
  f << "pair,s,eta,estimate,stderr,samples\n";
  for (const auto& r : est.rows)
    f << fmt::format("{},{},{},{:.12g},{:.4g},{}\n", est.pairs[r.pair].label(), s, r.eta, r.estimate,
                     r.stderr_, r.samples);

  double spread = 0.0;
  for (std::size_t p = 0; p < est.pairs.size(); ++p) {
    double lo = INFINITY, hi = 0.0;
    for (std::size_t e = 0; e < est.etas.size(); ++e) {
      lo = std::min(lo, est.row(p, e).estimate);
      hi = std::max(hi, est.row(p, e).estimate);
    }
    if (lo > 0) spread = std::max(spread, hi / lo - 1.0);
  }
  summary["max_eta_spread"] = spread;

  if (est.pairs.size() >= 4) {
    std::size_t e0 = std::min_element(est.etas.begin(), est.etas.end()) - est.etas.begin();
    std::vector<DecaySample> d;
    for (std::size_t p = 0; p < est.pairs.size(); ++p)
      d.push_back({norm(est.pairs[p].y - est.pairs[p].x), est.row(p, e0).estimate, est.row(p, e0).stderr_});
    try {
      CorrelationFit fit = correlation_length_fit(d, s);
      summary["xi"] = {{"decaying", fit.decaying}, {"xi", fit.xi}, {"xi_low", fit.xi_low},
                       {"xi_high", std::isfinite(fit.xi_high) ? json(fit.xi_high) : json("inf")},
                       {"note", fit.note}};
    } catch (const InvalidArgument& e) {
      summary["xi"] = {{"note", e.what()}};
    }
  }
  log << fmt::format("fracmom: {} pairs x {} etas, max eta spread {:.3f}\n", est.pairs.size(),
                     est.etas.size(), spread);
  return summary;
}

json cmd_criterion(const Config& c, Sink& out, std::ostream& log) {
  double lambda = c.real("lambda"), estar = c.real("estar");
  CriterionOptions co;
  co.samples = std::uint64_t(positive_int(c, "samples"));
  co.eta = c.real("eta");
  co.seed = std::uint64_t(c.integer("seed"));
  co.density = DensitySpec::from_name(c.text("density"));
  co.threads = positive_int(c, "threads");
  EnergyContext ctx = context_from_estar(estar, lambda);
  auto f = out.open("criterion.csv");
  f << "L,raw_boundary_sum,stderr,value,margin,pass,eta,implied_decay_rate\n";
  json rows = json::array();
  for (int L : c.integers("L")) {
    if (L < 1) throw ConfigError("L must be >= 1");
    CriterionReport r = finite_volume_criterion(L, ctx, c.real("s"), c.real("b"), c.real("Bs"), co);
    f << fmt::format("{},{:.12g},{:.4g},{:.6g},{:.6g},{},{},{:.6g}\n", L, r.raw_boundary_sum,
                     r.boundary_stderr, r.value, r.margin, r.pass, r.eta_used, r.implied_decay_rate);
    rows.push_back({{"L", L},
                    {"raw_boundary_sum", r.raw_boundary_sum},
                    {"value", std::isfinite(r.value) ? json(r.value) : json("inf")},
                    {"margin", std::isfinite(r.margin) ? json(r.margin) : json("-inf")},
                    {"pass", r.pass}});
    log << fmt::format("criterion: L={} value {:.4g} margin {:.4g}\n", L, r.value, r.margin);
  }
  return {{"lambda", lambda}, {"estar", estar}, {"energy", ctx.energy}, {"rows", rows}};
}

json dispatch(const Config& c, Sink& out, std::ostream& log) {
  const std::string& cmd = c.command();
  if (cmd == "selfenergy") return cmd_selfenergy(c, out, log);
  if (cmd == "green") return cmd_green(c, out, log);
  if (cmd == "diagrams") return cmd_diagrams(c, out, log);
  if (cmd == "diagram-value") return cmd_diagram_value(c, out, log);
  if (cmd == "expand-verify") return cmd_expand_verify(c, out, log);
  if (cmd == "fracmom") return cmd_fracmom(c, out, log);
  if (cmd == "criterion") return cmd_criterion(c, out, log);
  throw ConfigError(fmt::format("unknown command '{}'", cmd));
}

}  // namespace

RunResult run(const Config& config, const fs::path& out_dir, std::ostream& log) {
  RunResult result;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    result.exit_code = kConfigError;
    result.error = fmt::format("cannot create output directory {}: {}", out_dir.string(), ec.message());
    log << "error: " << result.error << "\n";
    return result;
  }
  Sink sink{out_dir, result.outputs};
  std::string started = utc_now();
  auto t0 = std::chrono::steady_clock::now();
  json error_payload;
  try {
    result.summary = dispatch(config, sink, log);
    sink.write_json("summary.json", result.summary);
  } catch (const ConfigError& e) {
    result.exit_code = kConfigError;
    result.error = e.what();
  } catch (const InvalidArgument& e) {
    result.exit_code = kConfigError;
    result.error = e.what();
  } catch (const DomainError& e) {
    result.exit_code = kConfigError;
    result.error = e.what();
  } catch (const NumericalError& e) {
    result.exit_code = kNumericalFailure;
    result.error = e.what();
    error_payload["achieved_estimate"] = e.achieved_estimate();
  } catch (const std::exception& e) {
    result.exit_code = kNumericalFailure;
    result.error = e.what();
  }
  if (!result.error.empty()) log << "error: " << result.error << "\n";
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json manifest{{"artifact_version", kArtifactVersion},
                {"command", config.command()},
                {"config", config.values()},
                {"config_hash", config.hash()},
                {"started_utc", started},
                {"finished_utc", utc_now()},
                {"elapsed_seconds", elapsed},
                {"tolerances", tolerances_for(config.command())},
                {"outputs", result.outputs},
                {"exit_code", result.exit_code}};
  if (!result.error.empty()) {
    error_payload["message"] = result.error;
    manifest["error"] = error_payload;
  }
  std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << "\n";
  return result;
}

RunResult replay(const fs::path& manifest_path, const fs::path& out_dir, std::ostream& log) {
  std::ifstream in(manifest_path);
  if (!in) throw ConfigError(fmt::format("cannot read manifest {}", manifest_path.string()));
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("manifest {} is not valid JSON: {}", manifest_path.string(), e.what()));
  }
  if (!m.contains("command") || !m.contains("config"))
    throw ConfigError("manifest lacks command or config");
  auto values = m["config"].get<std::map<std::string, std::string>>();
  Config cfg = resolve_config(m["command"].get<std::string>(), {}, values);
  if (m.contains("config_hash") && m["config_hash"] != cfg.hash())
    log << "warning: config hash differs from the manifest\n";
  return run(cfg, out_dir, log);
}

}  // namespace lifshitz::cli
