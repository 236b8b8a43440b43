#include "pssim/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pssim/errors.hpp"
#include "pssim/version.hpp"

namespace pssim::io {
namespace {

using njson = nlohmann::ordered_json;

constexpr const char* kTimeseriesHeader = "t,p0,p1,p2,p3,s01_abs,s12_abs,s02_abs,intensity";

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string trim(std::string s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.erase(s.begin());
  while (!s.empty() && is_space(s.back())) s.pop_back();
  return s;
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

constexpr std::array<const char*, 7> kSections = {"scenario", "rates",   "drive",      "collective",
                                                  "cavity",   "initial", "integration"};

std::vector<Entry> scan(const std::string& text) {
  std::vector<Entry> entries;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "malformed section header '" + s + "'");
      section = trim(s.substr(1, s.size() - 2));
      const auto known = [&](const char* name) { return section == name; };
      if (!std::any_of(kSections.begin(), kSections.end(), known))
        fail(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value, got '" + s + "'");
    if (section.empty()) fail(line, "key outside any [section]");
    Entry e;
    e.section = section;
    e.key = trim(s.substr(0, eq));
    e.value = trim(s.substr(eq + 1));
    e.line = line;
    if (e.key.empty()) fail(line, "empty key");
    entries.push_back(std::move(e));
  }
  return entries;
}

double to_double(const Entry& e) {
  char* end = nullptr;
  const double x = std::strtod(e.value.c_str(), &end);
  if (e.value.empty() || end != e.value.c_str() + e.value.size())
    fail(e.line, e.key + ": expected a number, got '" + e.value + "'");
  return x;
}

std::int64_t to_int(const Entry& e) {
  char* end = nullptr;
  const long long x = std::strtoll(e.value.c_str(), &end, 10);
  if (e.value.empty() || end != e.value.c_str() + e.value.size())
    fail(e.line, e.key + ": expected an integer, got '" + e.value + "'");
  return x;
}

bool to_bool(const Entry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  fail(e.line, e.key + ": expected true or false, got '" + e.value + "'");
}

void apply_entry(scenarios::Scenario& sc, const Entry& e) {
  const std::string& s = e.section;
  const std::string& k = e.key;
  if (s == "scenario") {
    if (k == "name") {
      sc.name = e.value;
      return;
    }
    if (k == "engine") {
      try {
        sc.engine = scenarios::engine_from_string(e.value);
      } catch (const ConfigError& err) {
        fail(e.line, err.what());
      }
      return;
    }
    if (k == "n_atoms") {
      sc.params.n_atoms = to_int(e);
      return;
    }
    if (k == "reference") {
      sc.with_reference = to_bool(e);
      return;
    }
  } else if (s == "rates") {
    if (k == "gamma0") {
      sc.params.gamma0 = to_double(e);
      return;
    }
    if (k == "gamma1") {
      sc.params.gamma1 = to_double(e);
      return;
    }
    if (k == "gamma2") {
      sc.params.gamma2 = to_double(e);
      return;
    }
    if (k == "gamma2_si") {
      sc.params.gamma2_si = to_double(e);
      return;
    }
  } else if (s == "drive") {
    if (k == "rabi") {
      sc.params.rabi = to_double(e);
      return;
    }
  } else if (s == "collective") {
    if (k == "mu0") {
      sc.params.mu0 = to_double(e);
      return;
    }
    if (k == "mu1") {
      sc.params.mu1 = to_double(e);
      return;
    }
    if (k == "collective_01") {
      sc.params.collective_01 = to_bool(e);
      return;
    }
    if (k == "collective_12") {
      sc.params.collective_12 = to_bool(e);
      return;
    }
    if (k == "mu1_product") {
      sc.mu1_product = to_double(e);
      return;
    }
  } else if (s == "cavity") {
    if (k == "g" || k == "kappa") {
      CavityConfig cav = sc.cavity.value_or(CavityConfig{});
      (k == "g" ? cav.g : cav.kappa) = to_double(e);
      sc.cavity = cav;
      return;
    }
  } else if (s == "initial") {
    if (k.size() == 2 && k[0] == 'f' && k[1] >= '0' && k[1] <= '3') {
      sc.initial.fractions[k[1] - '0'] = to_double(e);
      return;
    }
    if (k == "seed") {
      if (e.value == "none")
        sc.initial.seed = SeedPolicy::none;
      else if (e.value == "tipping")
        sc.initial.seed = SeedPolicy::tipping;
      else
        fail(e.line, "seed: expected none or tipping, got '" + e.value + "'");
      return;
    }
    if (k == "epsilon") {
      if (e.value == "auto") {
        sc.initial.epsilon = 0.0;
        sc.initial.epsilon_auto = true;
      } else {
        sc.initial.epsilon = to_double(e);
        sc.initial.epsilon_auto = false;
      }
      return;
    }
    if (k == "scaling") {
      if (e.value == "fixed")
        sc.initial.scaling = InitialScaling::fixed;
      else if (e.value == "ignition")
        sc.initial.scaling = InitialScaling::one_atom_ignition;
      else
        fail(e.line, "scaling: expected fixed or ignition, got '" + e.value + "'");
      return;
    }
  } else if (s == "integration") {
    if (k == "t_start") {
      sc.spec.t_start = to_double(e);
      return;
    }
    if (k == "t_end") {
      sc.spec.t_end = to_double(e);
      return;
    }
    if (k == "rtol") {
      sc.spec.rtol = to_double(e);
      return;
    }
    if (k == "atol") {
      sc.spec.atol = to_double(e);
      return;
    }
    if (k == "max_step") {
      sc.spec.max_step = to_double(e);
      return;
    }
    if (k == "samples") {
      sc.spec.sample_count = static_cast<int>(to_int(e));
      return;
    }
  }
  fail(e.line, "unknown key '" + k + "' in [" + s + "]");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  out << text;
  out.flush();
  if (!out) throw RuntimeFailure("write failed: " + path.string());
}

njson params_json(const ValidatedParams& p) {
  njson j;
  j["gamma0"] = p.gamma0;
  j["gamma1"] = p.gamma1;
  j["gamma2"] = p.gamma2;
  j["rabi"] = p.rabi;
  j["n_atoms"] = p.n_atoms;
  j["mu0"] = p.mu0;
  j["mu1"] = p.mu1;
  j["collective_01"] = p.collective_01;
  j["collective_12"] = p.collective_12;
  j["gamma2_si"] = p.gamma2_si;
  return j;
}

njson metrics_json(const observables::RunResult& run) {
  const auto& m = run.metrics;
  njson j;
  j["tau_lifetime"] = m.tau_lifetime.tau;
  j["tau_is_lower_bound"] = m.tau_lifetime.lower_bound;
  j["extension_factor"] = m.extension_factor;
  j["burst_times"] = m.burst_times;
  j["t_delay_estimate"] = m.t_delay_estimate;
  j["annihilated_final"] = run.p3.empty() ? 0.0 : run.p3.back();
  return j;
}

njson run_json(const observables::RunResult& run) {
  njson j;
  j["engine"] = run.engine;
  j["params"] = params_json(run.params);
  j["seconds_per_time_unit"] = 1.0 / run.params.gamma2_si;
  j["metrics"] = metrics_json(run);
  njson audit;
  audit["trace_drift"] = run.audit.trace_drift;
  audit["positivity_floor"] = run.audit.positivity_floor;
  double final_sum = 0.0;
  if (!run.t.empty())
    final_sum = run.p0.back() + run.p1.back() + run.p2.back() + run.p3.back();
  audit["final_population_sum"] = final_sum;
  j["audit"] = audit;
  return j;
}

}  // namespace

scenarios::Scenario parse_config(const std::string& text) {
  const auto entries = scan(text);
  scenarios::Scenario sc;
  bool preset_seen = false;
  for (const auto& e : entries) {
    if (e.section == "scenario" && e.key == "preset") {
      if (preset_seen) fail(e.line, "duplicate preset key");
      try {
        sc = scenarios::preset_by_name(e.value);
      } catch (const ConfigError& err) {
        fail(e.line, err.what());
      }
      preset_seen = true;
    }
  }
  for (const auto& e : entries) {
    if (e.section == "scenario" && e.key == "preset") continue;
    apply_entry(sc, e);
  }
  scenarios::check_scenario(sc);
  scenarios::effective_params(sc);
  return sc;
}

scenarios::Scenario load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string format_config(const scenarios::Scenario& sc) {
  const auto g = [](double v) { return fmt(v, 17); };
  const auto b = [](bool v) { return v ? "true" : "false"; };
  std::ostringstream os;
  os << "[scenario]\n";
  os << "name = " << sc.name << "\n";
  os << "engine = " << scenarios::to_string(sc.engine) << "\n";
  os << "n_atoms = " << sc.params.n_atoms << "\n";
  os << "reference = " << b(sc.with_reference) << "\n";
  os << "\n[rates]\n";
  os << "gamma0 = " << g(sc.params.gamma0) << "\n";
  os << "gamma1 = " << g(sc.params.gamma1) << "\n";
  os << "gamma2 = " << g(sc.params.gamma2) << "\n";
  os << "gamma2_si = " << g(sc.params.gamma2_si) << "\n";
  os << "\n[drive]\n";
  os << "rabi = " << g(sc.params.rabi) << "\n";
  os << "\n[collective]\n";
  os << "mu0 = " << g(sc.params.mu0) << "\n";
  os << "mu1 = " << g(sc.params.mu1) << "\n";
  os << "collective_01 = " << b(sc.params.collective_01) << "\n";
  os << "collective_12 = " << b(sc.params.collective_12) << "\n";
  os << "mu1_product = " << g(sc.mu1_product) << "\n";
  if (sc.cavity) {
    os << "\n[cavity]\n";
    os << "g = " << g(sc.cavity->g) << "\n";
    os << "kappa = " << g(sc.cavity->kappa) << "\n";
  }
  os << "\n[initial]\n";
  for (int i = 0; i < 4; ++i) os << "f" << i << " = " << g(sc.initial.fractions[i]) << "\n";
  os << "seed = " << (sc.initial.seed == SeedPolicy::tipping ? "tipping" : "none") << "\n";
  if (sc.initial.epsilon_auto)
    os << "epsilon = auto\n";
  else
    os << "epsilon = " << g(sc.initial.epsilon) << "\n";
  os << "scaling = "
     << (sc.initial.scaling == InitialScaling::one_atom_ignition ? "ignition" : "fixed") << "\n";
  os << "\n[integration]\n";
  os << "t_start = " << g(sc.spec.t_start) << "\n";
  os << "t_end = " << g(sc.spec.t_end) << "\n";
  os << "rtol = " << g(sc.spec.rtol) << "\n";
  os << "atol = " << g(sc.spec.atol) << "\n";
  os << "max_step = " << g(sc.spec.max_step) << "\n";
  os << "samples = " << sc.spec.sample_count << "\n";
  return os.str();
}

void write_timeseries(const observables::RunResult& run, const std::filesystem::path& path) {
  std::ostringstream os;
  os << kTimeseriesHeader << "\n";
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    os << fmt(run.t[i], 12) << ',' << fmt(run.p0[i], 12) << ',' << fmt(run.p1[i], 12) << ','
       << fmt(run.p2[i], 12) << ',' << fmt(run.p3[i], 12) << ',' << fmt(run.s01_abs[i], 12) << ','
       << fmt(run.s12_abs[i], 12) << ',' << fmt(run.s02_abs[i], 12) << ','
       << fmt(run.intensity[i], 12) << '\n';
  }
  write_text(path, os.str());
}

observables::RunResult read_timeseries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open timeseries file: " + path.string());

  const auto next_line = [&in](std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  std::string line;
  if (!next_line(line) || line != kTimeseriesHeader)
    throw ConfigError("unexpected timeseries header in " + path.string());

  observables::RunResult run;
  std::array<std::vector<double>*, 9> cols = {&run.t,       &run.p0,      &run.p1,
                                              &run.p2,      &run.p3,      &run.s01_abs,
                                              &run.s12_abs, &run.s02_abs, &run.intensity};
  int lineno = 1;
  while (next_line(line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::size_t start = 0;
    for (int c = 0; c < 9; ++c) {
      const bool last = c == 8;
      const auto comma = line.find(',', start);
      if (last != (comma == std::string::npos))
        throw ConfigError("timeseries line " + std::to_string(lineno) + ": expected 9 columns");
      const std::string field = line.substr(start, last ? std::string::npos : comma - start);
      char* end = nullptr;
      const double x = std::strtod(field.c_str(), &end);
      if (field.empty() || end != field.c_str() + field.size())
        throw ConfigError("timeseries line " + std::to_string(lineno) +
                          ": expected a number, got '" + field + "'");
      cols[c]->push_back(x);
      start = comma + 1;
    }
  }
  return run;
}

std::string summary_json(const observables::RunResult& run) { return run_json(run).dump(2) + "\n"; }

void write_summary(const scenarios::Scenario& sc, const scenarios::RunOutput& out,
                   const OutputBundle& bundle) {
  njson doc;
  doc["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  doc["scenario"] = sc.name;
  doc["run"] = run_json(out.run);
  if (out.reference) doc["reference"] = run_json(*out.reference);
  njson files;
  files["timeseries"] = bundle.timeseries;
  files["plot"] = bundle.plot;
  if (!bundle.reference.empty()) files["reference_timeseries"] = bundle.reference;
  doc["files"] = files;
  write_text(bundle.directory / bundle.summary, doc.dump(2) + "\n");
}

void emit_plot_script(const scenarios::Scenario& sc, const OutputBundle& bundle) {
  std::ostringstream py;
  py << "#!/usr/bin/env python3\n"
        "\"\"\"Render the populations in "
     << bundle.timeseries
     << " next to this script.\"\"\"\n"
        "import csv\n"
        "import os\n"
        "\n"
        "import matplotlib\n"
        "\n"
        "matplotlib.use(\"Agg\")\n"
        "import matplotlib.pyplot as plt\n"
        "\n"
        "HERE = os.path.dirname(os.path.abspath(__file__))\n"
        "\n"
        "\n"
        "def load(name):\n"
        "    cols = {}\n"
        "    with open(os.path.join(HERE, name), newline=\"\") as fh:\n"
        "        for row in csv.DictReader(fh):\n"
        "            for key, value in row.items():\n"
        "                cols.setdefault(key, []).append(float(value))\n"
        "    return cols\n"
        "\n"
        "\n"
        "d = load(\""
     << bundle.timeseries
     << "\")\n"
        "fig, ax = plt.subplots(figsize=(7.5, 4.5))\n"
        "ax.plot(d[\"t\"], d[\"p1\"], \"-\", color=\"tab:red\", lw=1.8, label=\"2P population\")\n"
        "ax.plot(d[\"t\"], d[\"p2\"], \"--\", color=\"tab:blue\", lw=1.8, label=\"1S "
        "population\")\n"
        "ax.plot(d[\"t\"], d[\"p3\"], \":\", color=\"black\", lw=1.8, label=\"annihilated "
        "fraction\")\n";
  if (!bundle.reference.empty()) {
    py << "r = load(\"" << bundle.reference
       << "\")\n"
          "ax.plot(r[\"t\"], r[\"p1\"], \"-\", color=\"0.65\", lw=0.9,\n"
          "        label=\"independent-atom 2P\")\n";
  } else if (sc.params.rabi == 0.0) {
    py << "peak = max(abs(v) for v in d[\"intensity\"]) or 1.0\n"
          "ax.plot(d[\"t\"], [v / peak for v in d[\"intensity\"]], \"-\", color=\"0.65\", "
          "lw=0.9,\n"
          "        label=\"emission intensity / peak\")\n";
  }
  py << "ax.set_xlim(d[\"t\"][0], d[\"t\"][-1])\n"
        "ax.set_xlabel(\"time (units of 1/gamma2)\")\n"
        "ax.set_ylabel(\"population fraction\")\n"
        "ax.set_title(\""
     << sc.name
     << "\")\n"
        "ax.legend(loc=\"best\", frameon=False)\n"
        "fig.tight_layout()\n"
        "fig.savefig(os.path.join(HERE, \"figure.png\"), dpi=160)\n";
  write_text(bundle.directory / bundle.plot, py.str());
}

OutputBundle write_bundle(const scenarios::Scenario& sc, const scenarios::RunOutput& out,
                          const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());

  OutputBundle bundle;
  bundle.directory = dir;
  if (out.reference) bundle.reference = "reference.csv";

  write_timeseries(out.run, dir / bundle.timeseries);
  if (out.reference) write_timeseries(*out.reference, dir / bundle.reference);
  write_summary(sc, out, bundle);
  emit_plot_script(sc, bundle);
  return bundle;
}

namespace {

struct RunArgs {
  std::string preset;
  std::string config;
  std::string out;
  std::string engine;
  double rtol = 0.0;
  int samples = 0;
  double seed_epsilon = -1.0;
};

scenarios::Scenario build_scenario(const RunArgs& a) {
  if (a.preset.empty() == a.config.empty())
    throw ConfigError("exactly one of --preset or --config is required");
  scenarios::Scenario sc =
      a.preset.empty() ? load_config(a.config) : scenarios::preset_by_name(a.preset);
  if (!a.engine.empty()) sc.engine = scenarios::engine_from_string(a.engine);
  if (a.rtol > 0.0) sc.spec.rtol = a.rtol;
  if (a.samples > 0) sc.spec.sample_count = a.samples;
  if (a.seed_epsilon >= 0.0) {
    sc.initial.seed = SeedPolicy::tipping;
    sc.initial.epsilon = a.seed_epsilon;
    sc.initial.epsilon_auto = false;
  }
  return sc;
}

std::filesystem::path resolve_out(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PSSIM_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return ".";
}

void add_scenario_options(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--preset", a.preset, "built-in scenario name (see list-presets)");
  cmd->add_option("--config", a.config, "scenario configuration file");
  cmd->add_option("--out", a.out, "output directory (default: $PSSIM_OUT_DIR, else .)");
  cmd->add_option("--engine", a.engine, "override engine: exact, ladder, or meanfield");
  cmd->add_option("--rtol", a.rtol, "override relative tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--samples", a.samples, "override sample count")->check(CLI::PositiveNumber);
  cmd->add_option("--seed-epsilon", a.seed_epsilon, "override tipping-seed amplitude")
      ->check(CLI::NonNegativeNumber);
}

void print_metrics(std::ostream& os, const observables::RunResult& run) {
  const auto& m = run.metrics;
  os << "  tau_lifetime = " << fmt(m.tau_lifetime.tau, 6) << " ("
     << fmt(m.tau_lifetime.tau / run.params.gamma2_si, 4) << " s)";
  if (m.tau_lifetime.lower_bound) os << " [lower bound, window ended first]";
  os << "\n";
  if (!std::isnan(m.extension_factor))
    os << "  extension_factor = " << fmt(m.extension_factor, 6) << "\n";
  if (!m.burst_times.empty()) {
    os << "  bursts at";
    for (const double t : m.burst_times) os << " " << fmt(t, 6);
    os << "\n";
    if (!std::isnan(m.t_delay_estimate))
      os << "  t_delay_estimate = " << fmt(m.t_delay_estimate, 6) << "\n";
  }
}

int do_run(const RunArgs& a) {
  const scenarios::Scenario sc = build_scenario(a);
  const auto out = scenarios::run_scenario(sc);
  const auto bundle = write_bundle(sc, out, resolve_out(a.out));

  std::cout << sc.name << ": engine " << out.run.engine << ", N = " << out.run.params.n_atoms
            << "\n";
  print_metrics(std::cout, out.run);
  std::cout << "  output: " << bundle.directory.string() << "/{" << bundle.timeseries << ", "
            << bundle.summary << ", " << bundle.plot;
  if (!bundle.reference.empty()) std::cout << ", " << bundle.reference;
  std::cout << "}\n";
  return 0;
}

int do_sweep(const RunArgs& a, const std::string& axis_name, std::vector<double> values) {
  const scenarios::Scenario base = build_scenario(a);
  const auto axis = scenarios::axis_from_string(axis_name);
  const auto results = scenarios::sweep(base, axis, values);
  std::sort(values.begin(), values.end());

  const auto dir = resolve_out(a.out);
  std::cout << base.name << ": sweep over " << scenarios::to_string(axis) << "\n";

  njson runs = njson::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    scenarios::Scenario point = base;
    std::ostringstream name;
    name << base.name << "-" << scenarios::to_string(axis) << "=" << values[i];
    point.name = name.str();
    point.with_reference = true;

    const std::string subdir =
        std::string(scenarios::to_string(axis)) + "=" + fmt(values[i], 12);
    write_bundle(point, results[i], dir / subdir);

    njson entry;
    entry["value"] = values[i];
    entry["directory"] = subdir;
    entry["scenario"] = point.name;
    entry["metrics"] = metrics_json(results[i].run);
    runs.push_back(std::move(entry));

    const auto& m = results[i].run.metrics;
    std::cout << "  " << scenarios::to_string(axis) << " = " << fmt(values[i], 6)
              << ": tau_lifetime = " << fmt(m.tau_lifetime.tau, 6);
    if (!std::isnan(m.extension_factor))
      std::cout << ", extension_factor = " << fmt(m.extension_factor, 6);
    std::cout << "\n";
  }

  njson doc;
  doc["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  doc["base"] = base.name;
  doc["axis"] = scenarios::to_string(axis);
  doc["runs"] = runs;
  write_text(dir / "sweep_summary.json", doc.dump(2) + "\n");
  std::cout << "  output: " << (dir / "sweep_summary.json").string() << " and one bundle per value\n";
  return 0;
}

int do_validate(const std::string& path) {
  const auto sc = load_config(path);
  scenarios::check_scenario(sc);
  const auto v = scenarios::effective_params(sc);
  std::cout << "ok: " << (sc.name.empty() ? "(unnamed)" : sc.name) << ", engine "
            << scenarios::to_string(sc.engine) << ", N = " << v.n_atoms << ", gamma0 = "
            << fmt(v.gamma0, 6) << ", mu0_eff = " << fmt(v.mu0_effective(), 6)
            << ", mu1_eff = " << fmt(v.mu1_effective(), 6) << "\n";
  return 0;
}

int do_compare_oracle(std::int64_t n_atoms) {
  const auto cmp = scenarios::compare_engines(n_atoms);
  struct Row {
    const char* label;
    double dev;
    double threshold;
  };
  const std::array<Row, 3> rows = {{
      {"ladder    vs exact (pure collective emission)", cmp.ladder_vs_exact, 1e-8},
      {"meanfield vs exact (driven, mu = 0.1)         ", cmp.meanfield_vs_exact, 0.15},
      {"meanfield vs exact (N = 1, independent)       ", cmp.independent_vs_exact, 1e-6},
  }};
  std::cout << "engine comparison at N = " << n_atoms << "\n";
  bool ok = true;
  for (const auto& r : rows) {
    const bool pass = r.dev < r.threshold;
    ok = ok && pass;
    std::cout << "  " << r.label << "  max |dp| = " << fmt(r.dev, 3) << "  "
              << (pass ? "[PASS" : "[FAIL") << " vs " << fmt(r.threshold, 3) << "]\n";
  }
  if (!ok) throw RuntimeFailure("engine comparison exceeded tolerance");
  return 0;
}

int do_list_presets() {
  const auto blurb = [](const std::string& name) -> const char* {
    if (name == "fig2") return "undriven collective cascade with emission bursts";
    if (name == "fig2-ladder") return "the same cascade at desk scale on the exact ladder";
    if (name == "fig3a") return "driven trapping, collectivity on the pump transition";
    if (name == "fig3b") return "cavity-enhanced driven trapping, both transitions collective";
    return "";
  };
  for (const auto& name : scenarios::preset_names()) {
    const auto sc = scenarios::preset_by_name(name);
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %-10s N = %-8lld %s", name.c_str(),
                  scenarios::to_string(sc.engine), static_cast<long long>(sc.params.n_atoms),
                  blurb(name));
    std::cout << line << "\n";
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{std::string(kToolName) +
               ": collective annihilation dynamics of driven three-level positronium"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "integrate one scenario and write its output bundle");
  add_scenario_options(run, run_args);

  RunArgs sweep_args;
  std::string axis;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "run a scenario once per parameter value");
  add_scenario_options(sweep, sweep_args);
  sweep->add_option("--axis", axis, "parameter to sweep: rabi, mu0, mu1, n_atoms, or gamma0")
      ->required();
  sweep->add_option("--values", values, "comma-separated parameter values")
      ->required()
      ->delimiter(',');

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a configuration file without running");
  validate->add_option("config", validate_path, "configuration file path")->required();

  std::int64_t oracle_n = 3;
  auto* oracle = app.add_subcommand(
      "compare-oracle", "cross-check the three engines on a small shared problem");
  oracle->add_option("--n", oracle_n, "ensemble size for the exact solver (2..6)");

  auto* list = app.add_subcommand("list-presets", "show the built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return do_run(run_args);
    if (sweep->parsed()) return do_sweep(sweep_args, axis, values);
    if (validate->parsed()) return do_validate(validate_path);
    if (oracle->parsed()) return do_compare_oracle(oracle_n);
    if (list->parsed()) return do_list_presets();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const RuntimeFailure& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace pssim::io
