#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

#include "qca1d/locround.hpp"
#include "qca1d/qop_io.hpp"

using namespace qca1d;
using nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "qca1d 0.1.0";

struct RunConfig {
  std::uint64_t seed = 211;
  double gate = 0.02;             // hypothesis-defect gate per condition
  double rank_tol = 1e-10;        // span rank cut
  double snap_threshold = 0.5;    // idempotent eigenvalue snapping
  double eigen_gap = 1e-6;        // eigenvalue grouping threshold
  double max_commutation = 0.125; // intersection hypothesis gate
  double conj_target = 1e-9;      // conjugation residual target
  int samples = 64;               // sampling depth for defect estimates
  int unitary_samples = 8;
  int gate_samples = 32;
  long dim_cap = 4096;
  std::string out_dir = ".";
};

void apply_config_line(RunConfig& c, const std::string& key,
                       const std::string& val) {
  if (key == "seed") c.seed = std::stoull(val);
  else if (key == "gate") c.gate = std::stod(val);
  else if (key == "rank_tol") c.rank_tol = std::stod(val);
  else if (key == "snap_threshold") c.snap_threshold = std::stod(val);
  else if (key == "eigen_gap") c.eigen_gap = std::stod(val);
  else if (key == "max_commutation") c.max_commutation = std::stod(val);
  else if (key == "conj_target") c.conj_target = std::stod(val);
  else if (key == "samples") c.samples = std::stoi(val);
  else if (key == "unitary_samples") c.unitary_samples = std::stoi(val);
  else if (key == "gate_samples") c.gate_samples = std::stoi(val);
  else if (key == "dim_cap") c.dim_cap = std::stol(val);
  else if (key == "out_dir") c.out_dir = val;
  else throw Error(ErrorKind::InvalidInput, "config: unknown key '" + key + "'");
}

// Flat key=value file; '#' starts a comment; blank lines ignored.
void load_config(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::InvalidInput, "cannot read config: " + path);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::InvalidInput,
            "config: expected key=value, got '" + line + "'");
    auto trim = [](std::string s) {
      auto a = s.find_first_not_of(" \t\r");
      auto b = s.find_last_not_of(" \t\r");
      return (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
    };
    apply_config_line(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["gate"] = c.gate;
  j["rank_tol"] = c.rank_tol;
  j["snap_threshold"] = c.snap_threshold;
  j["eigen_gap"] = c.eigen_gap;
  j["max_commutation"] = c.max_commutation;
  j["conj_target"] = c.conj_target;
  j["samples"] = c.samples;
  j["unitary_samples"] = c.unitary_samples;
  j["gate_samples"] = c.gate_samples;
  j["dim_cap"] = c.dim_cap;
  j["out_dir"] = c.out_dir;
  return j;
}

ExtractOptions extract_options(const RunConfig& c) {
  ExtractOptions o;
  o.gate = c.gate;
  o.gate_samples = c.gate_samples;
  o.seed = c.seed;
  o.intersect.max_commutation = c.max_commutation;
  o.intersect.recover.snap_threshold = c.snap_threshold;
  o.intersect.recover.seed = c.seed + 11;
  o.conjugation.target = c.conj_target;
  o.conjugation.seed = c.seed + 13;
  return o;
}

RoundOptions round_options(const RunConfig& c) {
  RoundOptions o;
  o.extract = extract_options(c);
  o.dist.samples = c.samples;
  o.dist.unitary_samples = c.unitary_samples;
  o.dist.seed = c.seed + 17;
  o.seed = c.seed + 19;
  return o;
}

ordered_json defect_json(const DefectEstimate& d) {
  return ordered_json{{"lower_bound", d.lower_bound},
                      {"upper_bound", d.upper_bound},
                      {"method", d.method}};
}

ordered_json report_skeleton(const std::string& command, const RunConfig& cfg) {
  ordered_json rep;
  rep["tool_version"] = kToolVersion;
  rep["command"] = command;
  rep["config"] = config_json(cfg);
  rep["inputs"] = ordered_json::object();
  return rep;
}

void emit_report(ordered_json& rep, const std::string& path, double elapsed_ms) {
  // Timing lives under one separable key so determinism checks can drop it.
  rep["timing"] = ordered_json{{"elapsed_ms", elapsed_ms}};
  if (path.empty()) {
    std::cout << rep.dump(2) << "\n";
  } else {
    std::ofstream out(path);
    require(out.good(), ErrorKind::InvalidInput,
            "cannot open for write: " + path);
    out << rep.dump(2) << "\n";
  }
}

ordered_json pair_json(const BoundaryFactorization& f, const RunConfig& cfg) {
  ordered_json j;
  j["window"] = f.window;
  j["x1"] = f.x1;
  j["x2"] = f.x2;
  j["dim_l_tilde"] = f.l_tilde.dim_algebra();
  j["dim_r_tilde"] = f.r_tilde.dim_algebra();
  j["hypothesis_defect"] = ordered_json{{"value", f.hypothesis_defect},
                                        {"gate", cfg.gate}};
  j["commutation_l"] = ordered_json{{"value", f.commutation_l},
                                    {"gate", cfg.max_commutation}};
  j["commutation_r"] = ordered_json{{"value", f.commutation_r},
                                    {"gate", cfg.max_commutation}};
  j["generation_distance"] = ordered_json{{"value", f.generation_distance},
                                          {"gate", 10 * cfg.gate}};
  j["fixup_distance"] = f.fixup_distance;
  j["fixup_residual"] = f.fixup_residual;
  return j;
}

ordered_json profile_json(const LocalityProfile& prof) {
  ordered_json j;
  j["range"] = prof.range;
  j["sites"] = prof.sites;
  ordered_json table = ordered_json::array();
  for (size_t i = 0; i < prof.sites.size(); ++i)
    table.push_back(ordered_json{{"site", prof.sites[i]},
                                 {"image", defect_json(prof.image_defect[i])},
                                 {"surjectivity", defect_json(prof.surj_defect[i])}});
  j["per_site"] = table;
  j["epsilon_image"] = prof.epsilon_image;
  j["epsilon_surj"] = prof.epsilon_surj;
  ordered_json spots = ordered_json::array();
  for (const auto& sc : prof.region_checks)
    spots.push_back(ordered_json{{"sites", sc.sites},
                                 {"measured", sc.measured},
                                 {"bound", sc.bound}});
  j["region_checks"] = spots;
  return j;
}

MatrixAlgebra read_algebra(const std::string& path, const RunConfig& cfg) {
  QopFile f = read_qop(path);
  require(!f.matrices.empty(), ErrorKind::InvalidInput,
          "algebra file has no matrices: " + path);
  std::vector<Mat> span = f.matrices;
  // Spanning family in, validated algebra out.
  return MatrixAlgebra::from_span(std::move(span), cfg.rank_tol);
}

int cmd_generate(const RunConfig& cfg, const std::string& kind, int sites,
                 int local_dim, const std::string& geometry, int steps,
                 int depth, double eps, const std::string& style,
                 const std::string& out, const std::string& report_path) {
  auto t0 = std::chrono::steady_clock::now();
  Lattice lat(geometry_from_name(geometry), std::vector<int>(sites, local_dim),
              cfg.dim_cap);
  QcaMap alpha;
  if (kind == "identity") {
    alpha = build_identity(lat);
  } else if (kind == "shift") {
    alpha = build_shift(lat, steps);
  } else if (kind == "brickwork") {
    alpha = build_brickwork(lat, depth, cfg.seed);
  } else if (kind == "compose") {
    // Deterministic composite: a shift applied after a brickwork.
    alpha = compose({build_brickwork(lat, depth, cfg.seed),
                     build_shift(lat, steps)});
  } else {
    throw Error(ErrorKind::InvalidInput, "unknown kind: " + kind);
  }
  if (eps > 0)
    alpha = perturb(alpha, eps, perturb_style_from_name(style), cfg.seed + 1);
  write_qca(out, alpha);

  ordered_json rep = report_skeleton("generate", cfg);
  rep["outputs"] = ordered_json{{out, file_digest(out)}};
  rep["qca"] = ordered_json{{"recipe", alpha.recipe},
                            {"geometry", geometry},
                            {"dims", lat.local_dims()},
                            {"total_dim", lat.total_dim()},
                            {"declared_range", alpha.declared_range},
                            {"epsilon", alpha.epsilon}};
  double ms = std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  emit_report(rep, report_path, ms);
  return 0;
}

int cmd_analyze(const RunConfig& cfg, const std::string& in, int range,
                const std::string& vs, const std::string& report_path) {
  auto t0 = std::chrono::steady_clock::now();
  QcaMap alpha = read_qca(in);
  ordered_json rep = report_skeleton("analyze", cfg);
  rep["inputs"][in] = file_digest(in);
  ProfileOptions popts;
  popts.samples = cfg.samples;
  popts.unitary_samples = cfg.unitary_samples;
  popts.seed = cfg.seed;
  rep["profile"] = profile_json(locality_profile(alpha, range, popts));
  if (!vs.empty()) {
    QcaMap beta = read_qca(vs);
    rep["inputs"][vs] = file_digest(vs);
    DistLocOptions dopts;
    dopts.samples = cfg.samples;
    dopts.unitary_samples = cfg.unitary_samples;
    dopts.seed = cfg.seed + 17;
    rep["dist_loc"] = defect_json(dist_loc(alpha, beta, dopts));
  }
  double ms = std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  emit_report(rep, report_path, ms);
  return 0;
}

int cmd_round(const RunConfig& cfg, const std::string& in,
              const std::string& out, const std::string& report_path) {
  auto t0 = std::chrono::steady_clock::now();
  QcaMap alpha = read_qca(in);
  RoundedQca ro = (alpha.lattice.geometry() == Geometry::Circle)
                      ? round_circle(alpha, round_options(cfg))
                      : glue_interval(alpha, round_options(cfg));
  ordered_json rep = report_skeleton("round", cfg);
  rep["inputs"][in] = file_digest(in);
  if (!out.empty()) {
    write_qca(out, ro.rounded);
    rep["outputs"] = ordered_json{{out, file_digest(out)}};
  }
  ordered_json cert;
  cert["index"] = ro.index.str();
  cert["certified_range"] = ro.certified_range;
  cert["domain"] = ro.rounded.domain.sites;
  cert["locality_certificate"] =
      ordered_json{{"value", ro.locality_certificate}, {"gate", 1e-9}};
  cert["surjectivity_certificate"] =
      ordered_json{{"value", ro.surjectivity_certificate}, {"gate", 1e-9}};
  cert["dist_loc"] = defect_json(ro.distance);
  ordered_json pairs = ordered_json::array();
  for (const auto& p : ro.pairs) pairs.push_back(pair_json(p, cfg));
  cert["pairs"] = pairs;
  cert["seed"] = cfg.seed;
  rep["certificate"] = cert;
  double ms = std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  emit_report(rep, report_path, ms);
  return 0;
}

int cmd_index(const RunConfig& cfg, const std::string& in,
              const std::string& report_path) {
  auto t0 = std::chrono::steady_clock::now();
  QcaMap alpha = read_qca(in);
  ordered_json rep = report_skeleton("index", cfg);
  rep["inputs"][in] = file_digest(in);
  rep["index"] = index_of_approx(alpha, extract_options(cfg)).str();
  double ms = std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  emit_report(rep, report_path, ms);
  return 0;
}

int cmd_intersect(const RunConfig& cfg, const std::string& a_path,
                  const std::string& b_path, const std::string& out,
                  const std::string& report_path) {
  auto t0 = std::chrono::steady_clock::now();
  MatrixAlgebra a = read_algebra(a_path, cfg);
  MatrixAlgebra b = read_algebra(b_path, cfg);
  IntersectOptions iopts;
  iopts.max_commutation = cfg.max_commutation;
  iopts.recover.snap_threshold = cfg.snap_threshold;
  iopts.recover.seed = cfg.seed + 11;
  IntersectionResult res = approximate_intersection(a, b, iopts);
  ordered_json rep = report_skeleton("intersect", cfg);
  rep["inputs"][a_path] = file_digest(a_path);
  rep["inputs"][b_path] = file_digest(b_path);
  rep["intersection"] =
      ordered_json{{"dim_a", a.dim_algebra()},
                   {"dim_b", b.dim_algebra()},
                   {"dim_c", res.c.dim_algebra()},
                   {"commutation",
                    ordered_json{{"value", res.commutation},
                                 {"gate", cfg.max_commutation}}},
                   {"idempotent_defect",
                    ordered_json{{"value", res.idempotent_defect},
                                 {"gate", 0.125}}},
                   {"projection_defect", res.projection_defect},
                   {"recovery_distance", res.recovery_distance}};
  if (!out.empty()) {
    QopFile f;
    QopFile fa = read_qop(a_path);
    f.dims = fa.dims;
    f.matrices = res.c.basis();
    write_qop(out, f);
    rep["outputs"] = ordered_json{{out, file_digest(out)}};
  }
  double ms = std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  emit_report(rep, report_path, ms);
  return 0;
}

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::GateFailure: return "gate-failure";
    case ErrorKind::Numerical: return "numerical";
  }
  return "unknown";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1D approximate-QCA toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path, report_path;
  app.add_option("--config", config_path, "flat key=value config file");
  app.add_option("--report", report_path, "report output path (default stdout)");
  // Flag overrides for the config keys.
  std::uint64_t seed_flag = 0;
  double gate_flag = -1;
  int samples_flag = -1;
  auto* seed_opt = app.add_option("--seed", seed_flag, "master seed");
  auto* gate_opt = app.add_option("--gate", gate_flag, "hypothesis gate");
  auto* samples_opt = app.add_option("--samples", samples_flag,
                                     "sampling depth for defect estimates");

  auto* gen = app.add_subcommand("generate", "build a QCA and write it out");
  std::string kind, geometry = "circle", style = "local-unitaries", out_path;
  int sites = 8, local_dim = 2, steps = 1, depth = 2;
  double eps = 0.0;
  gen->add_option("--kind", kind, "identity|shift|brickwork|compose")
      ->required();
  gen->add_option("--sites", sites);
  gen->add_option("--local-dim", local_dim);
  gen->add_option("--geometry", geometry, "circle|interval");
  gen->add_option("--steps", steps, "shift steps");
  gen->add_option("--depth", depth, "brickwork depth");
  gen->add_option("--perturb", eps, "perturbation level");
  gen->add_option("--style", style, "local-unitaries|hamiltonian-burst");
  gen->add_option("--out", out_path)->required();

  auto* ana = app.add_subcommand("analyze", "locality profile of a QCA file");
  std::string in_path, vs_path;
  int range = 2;
  ana->add_option("--in", in_path)->required();
  ana->add_option("--range", range);
  ana->add_option("--vs", vs_path, "second QCA for dist_loc");

  auto* rnd = app.add_subcommand("round", "round to an exact QCA");
  std::string round_in, round_out;
  rnd->add_option("--in", round_in)->required();
  rnd->add_option("--out", round_out, "rounded QCA output path");

  auto* idx = app.add_subcommand("index", "index of an approximate QCA");
  std::string index_in;
  idx->add_option("--in", index_in)->required();

  auto* its = app.add_subcommand("intersect", "intersection of two algebras");
  std::string a_path, b_path, its_out;
  its->add_option("--a", a_path)->required();
  its->add_option("--b", b_path)->required();
  its->add_option("--out", its_out, "intersection basis output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    nlohmann::ordered_json err{
        {"error", {{"kind", "invalid-input"}, {"message", e.what()},
                   {"exit_code", 3}}}};
    std::cerr << err.dump(2) << "\n";
    return 3;
  }

  try {
    if (!config_path.empty()) load_config(cfg, config_path);
    if (*seed_opt) cfg.seed = seed_flag;
    if (*gate_opt) cfg.gate = gate_flag;
    if (*samples_opt) cfg.samples = samples_flag;

    if (*gen)
      return cmd_generate(cfg, kind, sites, local_dim, geometry, steps, depth,
                          eps, style, out_path, report_path);
    if (*ana) return cmd_analyze(cfg, in_path, range, vs_path, report_path);
    if (*rnd) return cmd_round(cfg, round_in, round_out, report_path);
    if (*idx) return cmd_index(cfg, index_in, report_path);
    if (*its)
      return cmd_intersect(cfg, a_path, b_path, its_out, report_path);
  } catch (const Error& e) {
    nlohmann::ordered_json err{
        {"error", {{"kind", error_kind_name(e.kind())}, {"message", e.what()},
                   {"exit_code", e.exit_code()}}}};
    std::cerr << err.dump(2) << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    nlohmann::ordered_json err{
        {"error", {{"kind", "numerical"}, {"message", e.what()},
                   {"exit_code", 4}}}};
    std::cerr << err.dump(2) << "\n";
    return 4;
  }
  return 3;
}
