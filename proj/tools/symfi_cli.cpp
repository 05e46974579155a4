// Command-line front end. All computation goes through the C API in
// symfi/symfi.h; this translation unit only parses arguments, renders
// reports and writes plot files.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "symfi/symfi.h"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitClaimFailure = 1;
constexpr int kExitUsage = 2;

struct Owned {
  char* p = nullptr;
  ~Owned() { symfi_string_free(p); }
  explicit operator bool() const { return p != nullptr; }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

std::string default_catalog() {
  if (const char* env = std::getenv("SYMFI_CATALOG")) return env;
  return std::string(SYMFI_DATA_DIR) + "/catalog/corpus.json";
}

int fail_usage(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return kExitUsage;
}

// Minimal SVG polyline plot with a log10 y-axis.
void write_svg_curve(const fs::path& file, const std::string& title,
                     const std::vector<double>& xs,
                     const std::vector<double>& ys) {
  const double W = 640, H = 400, ml = 70, mr = 20, mt = 40, mb = 40;
  double xmin = xs.empty() ? 0 : xs.front(), xmax = xs.empty() ? 1 : xs.back();
  if (xmax <= xmin) xmax = xmin + 1;
  double lo = 0, hi = -300;
  for (double y : ys) {
    double ly = std::log10(std::max(y, 1e-18));
    lo = std::min(lo, ly);
    hi = std::max(hi, ly);
  }
  if (hi <= lo) hi = lo + 1;
  auto X = [&](double x) { return ml + (W - ml - mr) * (x - xmin) / (xmax - xmin); };
  auto Y = [&](double y) {
    double ly = std::log10(std::max(y, 1e-18));
    return H - mb - (H - mt - mb) * (ly - lo) / (hi - lo);
  };
  std::ofstream out(file);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W
      << "' height='" << H << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << W / 2 << "' y='20' text-anchor='middle' "
      << "font-family='monospace' font-size='13'>" << title << "</text>\n"
      << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr
      << "' y2='" << H - mb << "' stroke='black'/>\n"
      << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
      << H - mb << "' stroke='black'/>\n";
  for (int k = (int)std::ceil(lo); k <= (int)std::floor(hi); k += 3) {
    out << "<text x='" << ml - 8 << "' y='" << Y(std::pow(10.0, k)) + 4
        << "' text-anchor='end' font-family='monospace' font-size='11'>1e"
        << k << "</text>\n";
  }
  out << "<polyline fill='none' stroke='#1f6fb2' stroke-width='1.2' points='";
  for (std::size_t k = 0; k < xs.size(); ++k)
    out << X(xs[k]) << ',' << Y(ys[k]) << ' ';
  out << "'/>\n</svg>\n";
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (!std::isalnum((unsigned char)c) && c != '-' && c != '_') c = '_';
  return s;
}

void plot_drift_curves(symfi_catalog* cat, const json& report,
                       const std::string& dir, double t_end, double h,
                       unsigned long long seed) {
  fs::create_directories(dir);
  for (const auto& entry : report["entries"]) {
    if (!entry.contains("instantiations") || entry["instantiations"].empty())
      continue;
    std::string id = entry["entry"];
    for (const auto& fi : entry["instantiations"][0]["drift"]) {
      std::string fid = fi["name"];
      Owned csv{symfi_drift_curve_csv(cat, id.c_str(), fid.c_str(), t_end, h,
                                      seed)};
      if (!csv) continue;
      std::istringstream in(csv.str());
      std::string line;
      std::getline(in, line);  // header
      std::vector<double> ts, ds;
      while (std::getline(in, line)) {
        double t, d;
        if (std::sscanf(line.c_str(), "%lf,%lf", &t, &d) == 2) {
          ts.push_back(t);
          ds.push_back(d);
        }
      }
      fs::path file = fs::path(dir) / ("drift_" + sanitize(id) + "_" +
                                       sanitize(fid) + ".svg");
      write_svg_curve(file, id + " : |" + fid + "(t) - " + fid + "(0)|", ts,
                      ds);
    }
  }
}

void render_verify_table(const json& report, std::ostream& os) {
  os << "seed " << report["seed"] << "  tolerances: residual "
     << report["tolerances"]["residual"].get<double>() << ", drift "
     << report["tolerances"]["drift"].get<double>() << "\n\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-34s %-8s %-12s %-12s %s\n", "entry",
                "pass", "max |dI/dt|", "max drift", "classification");
  os << line;
  for (const auto& e : report["entries"]) {
    double worst_c = 0, worst_d = 0;
    std::string cls = "-";
    if (e.contains("instantiations"))
      for (const auto& inst : e["instantiations"]) {
        for (const auto& c : inst["conservation"])
          worst_c = std::max(worst_c, c["value"].get<double>());
        for (const auto& c : inst["drift"])
          worst_d = std::max(worst_d, c["value"].get<double>());
        cls = inst["classification"]["verdict"].get<std::string>();
      }
    std::snprintf(line, sizeof line, "%-34s %-8s %-12.3e %-12.3e %s\n",
                  e["entry"].get<std::string>().c_str(),
                  e["pass"].get<bool>() ? "pass" : "FAIL", worst_c, worst_d,
                  cls.c_str());
    os << line;
    if (e.contains("error"))
      os << "    error: " << e["error"].get<std::string>() << "\n";
  }
  os << "\n" << report["summary"]["passed"] << "/"
     << report["summary"]["total"] << " entries passed\n";
}

void render_verify_csv(const json& report, std::ostream& os) {
  os << "entry,instantiation,check,name,value,pass\n";
  for (const auto& e : report["entries"]) {
    if (!e.contains("instantiations")) continue;
    for (const auto& inst : e["instantiations"]) {
      auto dump = [&](const char* kind, const json& arr) {
        for (const auto& c : arr)
          os << e["entry"].get<std::string>() << ','
             << inst["label"].get<std::string>() << ',' << kind << ",\""
             << c["name"].get<std::string>() << "\","
             << c["value"].get<double>() << ','
             << (c["pass"].get<bool>() ? "1" : "0") << "\n";
      };
      dump("conservation", inst["conservation"]);
      dump("drift", inst["drift"]);
      dump("claim", inst["claims"]);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symfi: verify, classify and discover first integrals of 3d "
               "Newtonian potentials"};
  app.require_subcommand(1);

  std::string catalog_path = default_catalog();
  std::string entry_glob = "*";
  std::string format = "json";
  std::string plot_dir;
  symfi_options opts;
  symfi_options_init(&opts);
  bool no_drift = false, no_classification = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--tol-residual", opts.tol_residual,
                    "symbolic dI/dt tolerance");
    cmd->add_option("--tol-drift", opts.tol_drift, "trajectory drift tolerance");
    cmd->add_option("--svd-tol", opts.svd_tol, "relative rank cutoff");
    cmd->add_option("--samples", opts.samples, "sample count");
    cmd->add_option("--seed", opts.seed, "random seed");
    cmd->add_option("--format", format, "json|table|csv");
  };

  auto* verify = app.add_subcommand("verify", "verify catalog entries");
  verify->add_option("--catalog", catalog_path, "catalog file");
  verify->add_option("--entry", entry_glob, "entry id glob");
  verify->add_option("--plot", plot_dir, "write drift plots to this directory");
  verify->add_flag("--no-drift", no_drift, "skip trajectory drift checks");
  verify->add_flag("--no-classification", no_classification,
                   "skip classification");
  verify->add_option("--trajectories", opts.trajectories,
                     "initial conditions per entry");
  add_common(verify);

  auto* list = app.add_subcommand("list", "list catalog entry ids");
  list->add_option("--catalog", catalog_path, "catalog file");
  list->add_option("--entry", entry_glob, "entry id glob");

  std::string potential, param_csv;
  auto* discover = app.add_subcommand("discover",
                                      "search for autonomous quadratic FIs");
  discover->add_option("potential", potential, "potential expression")
      ->required();
  discover->add_option("--param", param_csv, "parameters, e.g. k1=2,k2=3");
  discover->add_option("--plot", plot_dir,
                       "write the singular-value spectrum to this directory");
  add_common(discover);

  std::string expr_a, expr_b, claimed;
  auto* bracket = app.add_subcommand("bracket", "evaluate a Poisson bracket");
  bracket->add_option("a", expr_a, "first expression")->required();
  bracket->add_option("b", expr_b, "second expression")->required();
  bracket->add_option("--potential", potential,
                      "potential (makes H available)");
  bracket->add_option("--claim", claimed, "claimed bracket value");
  bracket->add_option("--param", param_csv, "parameters");
  add_common(bracket);

  std::vector<double> q0{1, 1, 1}, v0{0, 0, 0};
  double t_end = 10.0, h = 1e-3;
  std::string out_file;
  auto* integrate = app.add_subcommand("integrate", "integrate a trajectory");
  integrate->add_option("potential", potential, "potential expression")
      ->required();
  integrate->add_option("--param", param_csv, "parameters");
  integrate->add_option("--q0", q0, "initial position")->expected(3);
  integrate->add_option("--v0", v0, "initial velocity")->expected(3);
  integrate->add_option("--t-end", t_end, "final time");
  integrate->add_option("--step", h, "step size");
  integrate->add_option("--out", out_file, "output CSV file (default stdout)");

  std::string parse_text;
  auto* parse_cmd = app.add_subcommand("parse", "echo the canonical form");
  parse_cmd->add_option("expr", parse_text, "expression")->required();
  parse_cmd->add_option("--param", param_csv, "parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  opts.with_drift = no_drift ? 0 : 1;
  opts.with_classification = no_classification ? 0 : 1;

  if (parse_cmd->parsed()) {
    Owned canon{symfi_parse_canonical(parse_text.c_str(), param_csv.c_str())};
    if (!canon) return fail_usage(symfi_last_error());
    std::cout << canon.str() << "\n";
    return kExitPass;
  }

  if (list->parsed()) {
    symfi_catalog* cat = symfi_catalog_open(catalog_path.c_str());
    if (!cat) return fail_usage(symfi_last_error());
    Owned ids{symfi_catalog_ids(cat, entry_glob.c_str())};
    symfi_catalog_close(cat);
    if (!ids) return fail_usage(symfi_last_error());
    std::cout << ids.str();
    return kExitPass;
  }

  if (verify->parsed()) {
    symfi_catalog* cat = symfi_catalog_open(catalog_path.c_str());
    if (!cat) return fail_usage(symfi_last_error());
    Owned rep{symfi_catalog_verify(cat, entry_glob.c_str(), &opts)};
    if (!rep) {
      symfi_catalog_close(cat);
      return fail_usage(symfi_last_error());
    }
    json report = json::parse(rep.str());
    if (!plot_dir.empty())
      plot_drift_curves(cat, report, plot_dir, opts.t_end, opts.h, opts.seed);
    symfi_catalog_close(cat);
    if (format == "table")
      render_verify_table(report, std::cout);
    else if (format == "csv")
      render_verify_csv(report, std::cout);
    else
      std::cout << report.dump(2) << "\n";
    int failed = report["summary"]["failed"].get<int>();
    return failed == 0 ? kExitPass : kExitClaimFailure;
  }

  if (discover->parsed()) {
    Owned res{symfi_discover(potential.c_str(), param_csv.c_str(), &opts)};
    if (!res) return fail_usage(symfi_last_error());
    json report = json::parse(res.str());
    if (!plot_dir.empty()) {
      fs::create_directories(plot_dir);
      std::vector<double> xs, ys;
      int k = 0;
      for (const auto& s : report["singular_values"]) {
        xs.push_back(++k);
        ys.push_back(std::max(s.get<double>(), 1e-18));
      }
      write_svg_curve(fs::path(plot_dir) / "singular_values.svg",
                      "singular value spectrum", xs, ys);
    }
    if (format == "table") {
      std::cout << "nullspace dimension: " << report["nullspace_dim"] << "\n";
      for (const auto& c : report["candidates"])
        std::cout << "  candidate: ddt residual "
                  << c["ddt_residual"].get<double>() << ", G = "
                  << (c["g"].is_null() ? std::string("(sampled)")
                                       : c["g"].get<std::string>())
                  << "\n";
    } else {
      std::cout << report.dump(2) << "\n";
    }
    return kExitPass;
  }

  if (bracket->parsed()) {
    Owned res{symfi_bracket(expr_a.c_str(), expr_b.c_str(), potential.c_str(),
                            param_csv.c_str(), claimed.c_str(), &opts)};
    if (!res) return fail_usage(symfi_last_error());
    std::cout << res.str() << "\n";
    return kExitPass;
  }

  if (integrate->parsed()) {
    Owned csv{symfi_integrate_csv(potential.c_str(), param_csv.c_str(),
                                  q0.data(), v0.data(), t_end, h)};
    if (!csv) return fail_usage(symfi_last_error());
    if (out_file.empty()) {
      std::cout << csv.str();
    } else {
      std::ofstream out(out_file);
      out << csv.str();
    }
    return kExitPass;
  }

  return fail_usage("no subcommand");
}
