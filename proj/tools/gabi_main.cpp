// gabi: numerical laboratory for the generalized Abelian integral J(h), its
// zero sequence, and limit cycles of the coupled 4D system.
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gabi/elliptic.hpp"
#include "gabi/genabel.hpp"
#include "gabi/odesim.hpp"
#include "gabi/specfun.hpp"
#include "gabi/verify.hpp"

using nlohmann::json;
using namespace gabi;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCapability = 3;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string c17(Complex v) {
  return g17(v.real()) + (v.imag() < 0.0 ? " - " : " + ") + g17(std::abs(v.imag())) + "i";
}

std::optional<Complex> parse_complex(const std::string& text) {
  std::istringstream is(text);
  double re = 0.0, im = 0.0;
  char comma = 0;
  if (is >> re >> comma >> im && comma == ',') return Complex(re, im);
  return std::nullopt;
}

/// Constants resolution order: --kappa flag, then GABI_KAPPA (testing
/// override), then the closed form.
specfun::ModelConstants resolve_constants(const std::string& kappa_flag) {
  std::optional<Complex> kappa;
  if (!kappa_flag.empty()) {
    kappa = parse_complex(kappa_flag);  // format guaranteed by the option validator
  } else if (const char* env = std::getenv("GABI_KAPPA")) {
    kappa = parse_complex(env);
    if (!kappa) throw std::runtime_error("GABI_KAPPA: expected RE,IM");
  }
  const Complex a(-std::numbers::sqrt3, std::numbers::sqrt3);
  return kappa ? specfun::model_constants(a, *kappa) : specfun::model_constants();
}

const CLI::Validator kComplexPair(
    [](std::string& s) {
      return parse_complex(s) ? std::string() : std::string("expected RE,IM");
    },
    "RE,IM");

std::ostream& open_sink(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open output file " + path);
  return file;
}

int cmd_constants(const std::string& kappa_flag, bool as_json, const std::string& out_path) {
  const auto mc = resolve_constants(kappa_flag);
  const Complex identity_rhs =
      Complex(0, 1) * (4.0 * std::numbers::sqrt3 + mc.a * mc.c0);
  const double identity_err = std::abs(mc.kappa - identity_rhs);
  const auto model = genabel::asymptotic_model(mc);
  const auto zeros = model.zeros(5);

  std::ofstream file;
  std::ostream& os = open_sink(file, out_path);
  if (as_json) {
    json j{{"a", {mc.a.real(), mc.a.imag()}},
           {"kappa", {mc.kappa.real(), mc.kappa.imag()}},
           {"c0", {mc.c0.real(), mc.c0.imag()}},
           {"c1", {mc.c1.real(), mc.c1.imag()}},
           {"R", mc.R},
           {"alpha0", mc.alpha0},
           {"kappa_identity_error", identity_err},
           {"kappa_identity_pass", identity_err < 1e-12}};
    json jz = json::array();
    for (std::size_t n = 0; n < zeros.size(); ++n) {
      jz.push_back({{"n", n + 1},
                    {"h", zeros[n]},
                    {"refinable", zeros[n] >= 1e-6}});
    }
    j["model_zeros"] = jz;
    os << j.dump(2) << "\n";
  } else {
    os << "a      = " << c17(mc.a) << "\n";
    os << "kappa  = " << c17(mc.kappa) << "\n";
    os << "C0     = " << c17(mc.c0) << "\n";
    os << "C1     = " << c17(mc.c1) << "\n";
    os << "R      = " << g17(mc.R) << "\n";
    os << "alpha0 = " << g17(mc.alpha0) << "\n";
    os << "kappa-identity |kappa - i(4 sqrt3 + a C0)| = " << g17(identity_err) << "  ["
       << (identity_err < 1e-12 ? "PASS" : "FAIL") << "]\n";
    os << "model zeros (h_n = exp(2(alpha0 + pi/2 - n pi))):\n";
    for (std::size_t n = 0; n < zeros.size(); ++n) {
      os << "  h_" << n + 1 << " = " << g17(zeros[n])
         << (zeros[n] >= 1e-6 ? "  (refinable)" : "  (model-only: below refinement floor)")
         << "\n";
    }
  }
  return kExitOk;
}

int cmd_abelian(const std::string& kappa_flag, double h, bool as_json,
                const std::string& out_path, const std::string& orbit_out, std::size_t orbit_n) {
  resolve_constants(kappa_flag);  // validates any override early
  const double t_inner = elliptic::period(h);
  const double t_outer = elliptic::period_outer(h);
  const auto ab = elliptic::abelian_pair(h);

  if (!orbit_out.empty()) {
    const auto orbit = elliptic::orbit_sample(h, orbit_n, elliptic::Anchor::MiddleRoot);
    std::ofstream f(orbit_out);
    if (!f) throw std::runtime_error("cannot open " + orbit_out);
    f << "t,x1,x2\n";
    for (const auto& p : orbit.samples) {
      f << g17(p.t) << "," << g17(p.x1) << "," << g17(p.x2) << "\n";
    }
  }

  std::ofstream file;
  std::ostream& os = open_sink(file, out_path);
  if (as_json) {
    os << json{{"h", h},
               {"T", t_inner},
               {"T_outer", t_outer},
               {"T_route_difference", std::abs(t_inner - t_outer)},
               {"I0", ab.i0},
               {"I1", ab.i1}}
              .dump(2)
       << "\n";
  } else {
    os << "h,T,T_outer,T_route_difference,I0,I1\n";
    os << g17(h) << "," << g17(t_inner) << "," << g17(t_outer) << ","
       << g17(std::abs(t_inner - t_outer)) << "," << g17(ab.i0) << "," << g17(ab.i1) << "\n";
  }
  return kExitOk;
}

struct PsiRow {
  double h, t_gamma, i0, i1, re_psi, im_psi, j, psi_err;
  std::string error;
};

int cmd_psi(const std::string& kappa_flag, double hmin, double hmax, int points, bool log_grid,
            bool as_json, const std::string& out_path, unsigned jobs) {
  const auto mc = resolve_constants(kappa_flag);
  std::vector<double> grid(points);
  for (int k = 0; k < points; ++k) {
    const double f = points == 1 ? 0.0 : static_cast<double>(k) / (points - 1);
    const double hk = log_grid
                          ? std::exp(std::log(hmin) + f * (std::log(hmax) - std::log(hmin)))
                          : hmin + f * (hmax - hmin);
    grid[k] = std::clamp(hk, 1e-7, 4.0 - 1e-7);  // scan domain; the clamp shows in the h column
  }

  auto row_of = [&mc](double h) {
    PsiRow row{h, 0, 0, 0, 0, 0, 0, 0, ""};
    try {
      const auto r = genabel::j_integral(h, mc);
      row = {h, r.t_gamma, r.i0, r.i1, r.psi.real(), r.psi.imag(), r.j_value, r.psi_err, ""};
    } catch (const std::exception& e) {
      row.error = e.what();  // per-row failure is recorded, not fatal
    }
    return row;
  };

  std::vector<PsiRow> rows(grid.size());
  if (jobs <= 1) {
    for (std::size_t k = 0; k < grid.size(); ++k) rows[k] = row_of(grid[k]);
  } else {
    std::vector<std::future<PsiRow>> futs;
    futs.reserve(grid.size());
    for (double h : grid) {
      futs.push_back(std::async(std::launch::async, row_of, h));
    }
    for (std::size_t k = 0; k < futs.size(); ++k) rows[k] = futs[k].get();  // ordered collection
  }

  std::ofstream file;
  std::ostream& os = open_sink(file, out_path);
  if (as_json) {
    json arr = json::array();
    for (const auto& r : rows) {
      json j{{"h", r.h},          {"T", r.t_gamma}, {"I0", r.i0},
             {"I1", r.i1},        {"RePsi", r.re_psi}, {"ImPsi", r.im_psi},
             {"J", r.j},          {"psi_err_achieved", r.psi_err}};
      if (!r.error.empty()) j["error"] = r.error;
      arr.push_back(j);
    }
    os << arr.dump(2) << "\n";
  } else {
    os << "h,T,I0,I1,RePsi,ImPsi,J,psi_err_achieved,error\n";
    for (const auto& r : rows) {
      os << g17(r.h) << "," << g17(r.t_gamma) << "," << g17(r.i0) << "," << g17(r.i1) << ","
         << g17(r.re_psi) << "," << g17(r.im_psi) << "," << g17(r.j) << "," << g17(r.psi_err)
         << "," << r.error << "\n";
    }
  }
  return kExitOk;
}

int cmd_zeros(const std::string& kappa_flag, int n_max, bool as_json, bool refined_only,
              const std::string& out_path) {
  const auto mc = resolve_constants(kappa_flag);
  if (refined_only) {
    // capability precondition: every requested zero must sit above the floor
    for (double hm : genabel::asymptotic_model(mc).zeros(n_max)) {
      if (hm < 1e-6) {
        std::cerr << "requested refined zeros include h = " << g17(hm)
                  << ", below the 1e-6 refinement floor\n";
        return kExitCapability;
      }
    }
  }
  std::vector<genabel::ZeroEntry> seq;
  try {
    seq = genabel::zero_sequence(mc, n_max);
  } catch (const genabel::ZeroBracketAnomaly& e) {
    std::cerr << "anomaly: " << e.what() << "\n";
    return kExitFailure;
  }

  std::ofstream file;
  std::ostream& os = open_sink(file, out_path);
  if (as_json) {
    json arr = json::array();
    for (std::size_t n = 0; n < seq.size(); ++n) {
      arr.push_back({{"n", n + 1},
                     {"h", seq[n].h},
                     {"source", seq[n].source == genabel::ZeroSource::Refined ? "Refined"
                                                                              : "ModelOnly"}});
    }
    os << arr.dump(2) << "\n";
  } else {
    os << "n,h,source\n";
    for (std::size_t n = 0; n < seq.size(); ++n) {
      os << n + 1 << "," << g17(seq[n].h) << ","
         << (seq[n].source == genabel::ZeroSource::Refined ? "Refined" : "ModelOnly") << "\n";
    }
  }
  return kExitOk;
}

int cmd_simulate(const std::string& kappa_flag, double h, double eps, int warmup, double tol,
                 int returns, bool surface, const std::vector<double>& locate, bool as_json,
                 const std::string& out_path, const std::string& trajectory_out,
                 double trajectory_time) {
  const auto mc = resolve_constants(kappa_flag);
  const auto params = odesim::SystemParams::with_kappa(mc.kappa, eps);

  std::ofstream file;
  std::ostream& os = open_sink(file, out_path);

  if (!trajectory_out.empty()) {
    const double x1_left = elliptic::cubic_roots(h).x1;
    const double t_end =
        trajectory_time > 0.0 ? trajectory_time : 3.0 * elliptic::period(h);
    const auto traj = odesim::integrate_trajectory({x1_left, 0.0, Complex(0.0, 0.0)}, t_end,
                                                   params, tol);
    std::ofstream tf(trajectory_out);
    if (!tf) throw std::runtime_error("cannot open " + trajectory_out);
    tf << "t,x1,x2,y_re,y_im\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const auto& s = traj.states[k];
      tf << g17(traj.times[k]) << "," << g17(s.x1) << "," << g17(s.x2) << ","
         << g17(s.y.real()) << "," << g17(s.y.imag()) << "\n";
    }
  }

  if (!locate.empty()) {
    const auto cyc = odesim::limit_cycle_locate(params, locate[0], locate[1], tol);
    if (as_json) {
      os << json{{"h", cyc.h},
                 {"residual", cyc.residual},
                 {"delta_h_lo", cyc.delta_h_lo},
                 {"delta_h_hi", cyc.delta_h_hi},
                 {"x1", cyc.state.x1},
                 {"x2", cyc.state.x2},
                 {"y", {cyc.state.y.real(), cyc.state.y.imag()}}}
                .dump(2)
         << "\n";
    } else {
      os << "h,residual,delta_h_lo,delta_h_hi,x1,x2,y_re,y_im\n";
      os << g17(cyc.h) << "," << g17(cyc.residual) << "," << g17(cyc.delta_h_lo) << ","
         << g17(cyc.delta_h_hi) << "," << g17(cyc.state.x1) << "," << g17(cyc.state.x2) << ","
         << g17(cyc.state.y.real()) << "," << g17(cyc.state.y.imag()) << "\n";
    }
    return kExitOk;
  }

  if (surface) {
    const double r = odesim::surface_residual(params, h, std::max(5, warmup), tol);
    if (as_json) {
      os << json{{"h", h}, {"eps", eps}, {"surface_residual", r}}.dump(2) << "\n";
    } else {
      os << "h,eps,surface_residual\n" << g17(h) << "," << g17(eps) << "," << g17(r) << "\n";
    }
    return kExitOk;
  }

  json arr = json::array();
  std::ostringstream csv;
  csv << "h_in,h_out,delta_h,return_time,transient_iterations\n";
  for (int k = 0; k < returns; ++k) {
    const auto rec = odesim::section_return(h, params, warmup + k, tol);
    arr.push_back({{"h_in", rec.h_in},
                   {"h_out", rec.h_out},
                   {"delta_h", rec.delta_h},
                   {"return_time", rec.return_time},
                   {"transient_iterations", rec.transient_iterations}});
    csv << g17(rec.h_in) << "," << g17(rec.h_out) << "," << g17(rec.delta_h) << ","
        << g17(rec.return_time) << "," << rec.transient_iterations << "\n";
  }
  os << (as_json ? arr.dump(2) + "\n" : csv.str());
  return kExitOk;
}

int cmd_verify(const std::string& kappa_flag, bool full) {
  const auto mc = resolve_constants(kappa_flag);
  const auto results =
      verify::run(full ? verify::Level::Full : verify::Level::Fast, mc);
  std::cout << verify::format_report(results);
  for (const auto& r : results) {
    if (!r.pass) return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for generalized Abelian integrals and limit cycles"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");  // keep -h free for --h energy options
  app.set_config("--config", "",
                 "experiment config file (key=value lines under a [subcommand] section)");

  std::string kappa_flag, out_path, orbit_out, format = "csv";
  bool as_json = false;
  double h = 2.0, hmin = 1e-5, hmax = 1e-2, eps = 1e-3, tol = 1e-13;
  int points = 40, n_max = 5, warmup = 5, returns = 1;
  bool log_grid = false, refined_only = false, full = false, surface = false;
  unsigned jobs = 1;
  std::vector<double> locate;


  auto* c_const = app.add_subcommand("constants", "closed-form constants and model zeros");
  c_const->add_flag("--json", as_json, "JSON output");
  c_const->add_option("--kappa", kappa_flag, "override kappa as RE,IM (testing)")->check(kComplexPair);
  c_const->add_option("-o,--out", out_path, "output file (default stdout)");

  auto* c_abel = app.add_subcommand("abelian", "period and Abelian integrals at one level");
  c_abel->set_help_flag("--help", "print help");
  c_abel->add_option("--h", h, "energy level in (0,4)")->required();
  c_abel->add_flag("--json", as_json, "JSON output");
  c_abel->add_option("--kappa", kappa_flag, "override kappa as RE,IM (testing)")->check(kComplexPair);
  c_abel->add_option("-o,--out", out_path, "output file (default stdout)");
  c_abel->add_option("--orbit-out", orbit_out, "dump the sampled orbit as CSV (t,x1,x2)");
  std::size_t orbit_n = 2048;
  c_abel->add_option("--orbit-n", orbit_n, "orbit sample count (>= 64)");

  auto* c_psi = app.add_subcommand("psi", "scan h: T, I0, I1, Psi, J rows");
  c_psi->add_option("--hmin", hmin, "grid start")->required()->check(CLI::PositiveNumber);
  c_psi->add_option("--hmax", hmax, "grid end")->required()->check(CLI::PositiveNumber);
  c_psi->add_option("--points", points, "grid size")->required()->check(CLI::Range(1, 1000000));
  c_psi->add_flag("--log", log_grid, "logarithmic grid");
  c_psi->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  c_psi->add_option("--jobs", jobs, "parallel workers (rows stay ordered)");
  c_psi->add_option("--kappa", kappa_flag, "override kappa as RE,IM (testing)")->check(kComplexPair);
  c_psi->add_option("-o,--out", out_path, "output file (default stdout)");

  auto* c_zero = app.add_subcommand("zeros", "model/refined zero sequence of J");
  c_zero->add_option("--n", n_max, "number of zeros")->required();
  c_zero->add_flag("--json", as_json, "JSON output");
  c_zero->add_flag("--refined", refined_only, "fail (exit 3) if any requested zero is model-only");
  c_zero->add_option("--kappa", kappa_flag, "override kappa as RE,IM (testing)")->check(kComplexPair);
  c_zero->add_option("-o,--out", out_path, "output file (default stdout)");

  auto* c_sim = app.add_subcommand("simulate", "4D return-map experiments");
  c_sim->set_help_flag("--help", "print help");
  c_sim->add_option("--h", h, "energy level in (0,4)");
  c_sim->add_option("--eps", eps, "coupling strength in [0, 0.1]");
  c_sim->add_option("--warmup", warmup, "relaxation returns before measuring");
  c_sim->add_option("--tol", tol, "integrator tolerance in [1e-13, 1e-6]");
  c_sim->add_option("--returns", returns, "number of measured returns");
  c_sim->add_flag("--surface", surface, "report max |y - eps H^4 g| over one loop");
  c_sim->add_option("--locate", locate, "bracket h_lo h_hi for limit-cycle bisection")
      ->expected(2);
  std::string trajectory_out;
  double trajectory_time = 0.0;
  c_sim->add_option("--trajectory-out", trajectory_out,
                    "dump the surface-start trajectory as CSV (t,x1,x2,y_re,y_im)");
  c_sim->add_option("--trajectory-time", trajectory_time,
                    "trajectory length (default 3 periods)");
  c_sim->add_flag("--json", as_json, "JSON output");
  c_sim->add_option("--kappa", kappa_flag, "override kappa as RE,IM (testing)")->check(kComplexPair);
  c_sim->add_option("-o,--out", out_path, "output file (default stdout)");

  auto* c_ver = app.add_subcommand("verify", "run the verification suite");
  c_ver->add_flag("--full", full, "include the 4D dynamics checks");
  bool fast_flag = false;
  c_ver->add_flag("--fast", fast_flag, "checks 1-9 and 11 only (default)");
  c_ver->add_option("--kappa", kappa_flag, "override kappa as RE,IM (testing)")->check(kComplexPair);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_const->parsed()) return cmd_constants(kappa_flag, as_json, out_path);
    if (c_abel->parsed())
      return cmd_abelian(kappa_flag, h, as_json, out_path, orbit_out, orbit_n);
    if (c_psi->parsed())
      return cmd_psi(kappa_flag, hmin, hmax, points, log_grid, format == "json", out_path, jobs);
    if (c_zero->parsed()) return cmd_zeros(kappa_flag, n_max, as_json, refined_only, out_path);
    if (c_sim->parsed())
      return cmd_simulate(kappa_flag, h, eps, warmup, tol, returns, surface, locate, as_json,
                          out_path, trajectory_out, trajectory_time);
    if (c_ver->parsed()) return cmd_verify(kappa_flag, full);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
