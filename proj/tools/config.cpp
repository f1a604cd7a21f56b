#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "emzi/errors.hpp"
#include "output.hpp"

namespace sim {

ConfigError::ConfigError(std::string key, std::size_t line, const std::string& what)
    : std::runtime_error(what), key_(std::move(key)), line_(line) {}

namespace {

struct Unit {
  const char* symbol;
  double scale;
};

const std::vector<Unit> kLength{{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}, {"µm", 1e-6},
                                {"nm", 1e-9}, {"pm", 1e-12}};
const std::vector<Unit> kEnergy{{"eV", 1.0}, {"keV", 1e3}, {"MeV", 1e6}};
const std::vector<Unit> kTime{{"s", 1.0}, {"ms", 1e-3}};
const std::vector<Unit> kRate{{"/s", 1.0}, {"Hz", 1.0}, {"kHz", 1e3}};
const std::vector<Unit> kNone{{"", 1.0}};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Ctx {
  std::string key;
  std::size_t line;
  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError(key, line, "line " + std::to_string(line) + ": key '" + key + "': " + why);
  }
};

double parse_quantity(std::string_view text, const std::vector<Unit>& units, const Ctx& ctx) {
  const std::string s = trim(text);
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr == first) ctx.fail("expected a number, got '" + s + "'");
  if (!std::isfinite(v)) ctx.fail("value must be finite");
  const std::string unit = trim(std::string_view(ptr, static_cast<std::size_t>(last - ptr)));
  for (const auto& u : units) {
    if (unit == u.symbol) return v * u.scale;
  }
  std::string allowed;
  for (const auto& u : units) allowed += std::string(allowed.empty() ? "" : ", ") + (*u.symbol ? u.symbol : "none");
  ctx.fail("unit '" + unit + "' not accepted (allowed: " + allowed + ")");
}

std::size_t parse_count(std::string_view text, const Ctx& ctx) {
  const std::string s = trim(text);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) ctx.fail("expected a non-negative integer, got '" + s + "'");
  return v;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

struct Key {
  std::function<void(RunConfig&, std::string_view, const Ctx&)> parse;
  std::function<std::string(const RunConfig&)> render;
};

enum class Sign { any, positive, non_negative };

void check_sign(double v, Sign s, const Ctx& ctx) {
  if (s == Sign::positive && !(v > 0.0)) ctx.fail("must be positive");
  if (s == Sign::non_negative && !(v >= 0.0)) ctx.fail("must not be negative");
}

template <class Access>
Key quantity(Access access, const std::vector<Unit>& units, Sign sign) {
  const std::string canonical = units.front().symbol;
  return {[=](RunConfig& c, std::string_view v, const Ctx& ctx) {
            const double x = parse_quantity(v, units, ctx);
            check_sign(x, sign, ctx);
            access(c) = x;
          },
          [=](const RunConfig& c) { return fmt17(access(c)) + (canonical.empty() ? "" : " " + canonical); }};
}

template <class Access>
Key count(Access access, std::size_t min, std::size_t max = static_cast<std::size_t>(-1)) {
  return {[=](RunConfig& c, std::string_view v, const Ctx& ctx) {
            const std::size_t n = parse_count(v, ctx);
            if (n < min || n > max) ctx.fail("must lie in [" + std::to_string(min) + ", " + std::to_string(max) + "]");
            access(c) = static_cast<std::remove_reference_t<decltype(access(c))>>(n);
          },
          [=](const RunConfig& c) { return std::to_string(access(c)); }};
}

template <class Access>
Key port(Access access) {
  return {[=](RunConfig& c, std::string_view v, const Ctx& ctx) {
            const std::string s = trim(v);
            if (s != "0" && s != "1" && s != "2") ctx.fail("port must be 0, 1 or 2");
            access(c) = s[0] - '0';
          },
          [=](const RunConfig& c) { return std::to_string(access(c)); }};
}

using Table = std::map<std::string, std::map<std::string, Key>>;

const Table& schema() {
  static const Table table = [] {
    Table t;
    auto& beam = t["beam"];
    beam["energy"] = {[](RunConfig& c, std::string_view v, const Ctx& ctx) {
                        c.energies_ev.clear();
                        for (const auto& item : split_list(v)) {
                          const double e = parse_quantity(item, kEnergy, ctx);
                          check_sign(e, Sign::positive, ctx);
                          c.energies_ev.push_back(e);
                        }
                      },
                      [](const RunConfig& c) {
                        std::string s;
                        for (double e : c.energies_ev) s += (s.empty() ? "" : ", ") + fmt17(e) + " eV";
                        return s;
                      }};
    beam["energy_spread"] = quantity([](auto& c) -> auto& { return c.energy_spread_ev; }, kEnergy, Sign::non_negative);

    auto& geo = t["geometry"];
    geo["source_to_collimator"] = quantity([](auto& c) -> auto& { return c.apparatus.distances.source_to_collimator; }, kLength, Sign::positive);
    geo["collimator_to_grating1"] = quantity([](auto& c) -> auto& { return c.apparatus.distances.collimator_to_grating1; }, kLength, Sign::positive);
    geo["grating1_to_grating2"] = quantity([](auto& c) -> auto& { return c.apparatus.distances.grating1_to_grating2; }, kLength, Sign::positive);
    geo["grating2_to_grating3"] = quantity([](auto& c) -> auto& { return c.apparatus.distances.grating2_to_grating3; }, kLength, Sign::positive);
    geo["grating3_to_detector"] = quantity([](auto& c) -> auto& { return c.apparatus.distances.grating3_to_detector; }, kLength, Sign::positive);
    geo["source_width"] = quantity([](auto& c) -> auto& { return c.apparatus.source_width; }, kLength, Sign::positive);
    geo["source_center"] = quantity([](auto& c) -> auto& { return c.apparatus.source_center; }, kLength, Sign::any);
    geo["collimator_width"] = quantity([](auto& c) -> auto& { return c.apparatus.collimator_width; }, kLength, Sign::positive);
    geo["collimator_center"] = quantity([](auto& c) -> auto& { return c.apparatus.collimator_center; }, kLength, Sign::any);
    geo["grating_period"] = quantity([](auto& c) -> auto& { return c.apparatus.grating_period; }, kLength, Sign::positive);
    geo["open_fraction"] = quantity([](auto& c) -> auto& { return c.apparatus.open_fraction; }, kNone, Sign::positive);
    geo["grating1_shift"] = quantity([](auto& c) -> auto& { return c.apparatus.grating_shifts[0]; }, kLength, Sign::any);
    geo["grating2_shift"] = quantity([](auto& c) -> auto& { return c.apparatus.grating_shifts[1]; }, kLength, Sign::any);
    geo["grating3_shift"] = quantity([](auto& c) -> auto& { return c.apparatus.grating_shifts[2]; }, kLength, Sign::any);
    geo["window_periods"] = {[](RunConfig& c, std::string_view v, const Ctx& ctx) {
                               c.apparatus.n_periods_window = trim(v) == "auto" ? 0 : parse_count(v, ctx);
                               if (trim(v) != "auto" && c.apparatus.n_periods_window == 0) ctx.fail("must be 'auto' or >= 1");
                             },
                             [](const RunConfig& c) {
                               return c.apparatus.n_periods_window == 0 ? std::string("auto")
                                                                        : std::to_string(c.apparatus.n_periods_window);
                             }};
    geo["detector_slit_width"] = quantity([](auto& c) -> auto& { return c.apparatus.detector_slit_width; }, kLength, Sign::positive);

    auto& sampling = t["sampling"];
    sampling["dx"] = {[](RunConfig& c, std::string_view v, const Ctx& ctx) {
                        if (trim(v) == "auto") {
                          c.dx.reset();
                          return;
                        }
                        const double x = parse_quantity(v, kLength, ctx);
                        check_sign(x, Sign::positive, ctx);
                        c.dx = x;
                      },
                      [](const RunConfig& c) { return c.dx ? fmt17(*c.dx) + " m" : std::string("auto"); }};
    sampling["n_samples"] = {[](RunConfig& c, std::string_view v, const Ctx& ctx) {
                               if (trim(v) == "auto") {
                                 c.n_samples.reset();
                                 return;
                               }
                               const std::size_t n = parse_count(v, ctx);
                               if (n < 16 || n > (std::size_t{1} << 24)) ctx.fail("must lie in [16, 16777216]");
                               c.n_samples = n;
                             },
                             [](const RunConfig& c) { return c.n_samples ? std::to_string(*c.n_samples) : std::string("auto"); }};

    t["engine"]["engine"] = {[](RunConfig& c, std::string_view v, const Ctx& ctx) {
                               const std::string s = trim(v);
                               if (s == "quantum") c.engine = EngineChoice::quantum;
                               else if (s == "classical") c.engine = EngineChoice::classical;
                               else if (s == "both") c.engine = EngineChoice::both;
                               else ctx.fail("expected quantum, classical or both");
                             },
                             [](const RunConfig& c) {
                               return std::string(c.engine == EngineChoice::quantum     ? "quantum"
                                                  : c.engine == EngineChoice::classical ? "classical"
                                                                                        : "both");
                             }};

    auto& coh = t["coherence"];
    coh["n_source_points"] = count([](auto& c) -> auto& { return c.coherence.n_source_points; }, 1, 4096);
    coh["max_source_points"] = count([](auto& c) -> auto& { return c.coherence.max_source_points; }, 1, 4096);
    coh["n_energy_samples"] = count([](auto& c) -> auto& { return c.coherence.n_energy_samples; }, 1, 256);
    coh["convergence_tol"] = quantity([](auto& c) -> auto& { return c.coherence.convergence_tol; }, kNone, Sign::positive);

    auto& cl = t["classical"];
    cl["n_source_samples"] = count([](auto& c) -> auto& { return c.classical.bundle.n_source_samples; }, 2, 100001);
    cl["n_collimator_samples"] = count([](auto& c) -> auto& { return c.classical.bundle.n_collimator_samples; }, 2, 100001);
    cl["max_samples"] = count([](auto& c) -> auto& { return c.classical.max_samples; }, 2, 100001);
    cl["convergence_tol"] = quantity([](auto& c) -> auto& { return c.classical.convergence_tol; }, kNone, Sign::positive);
    cl["quadrature"] = {[](RunConfig& c, std::string_view v, const Ctx& ctx) {
                          const std::string s = trim(v);
                          if (s == "grid") c.classical.bundle.quadrature = emzi::RayBundleSpec::Quadrature::deterministic_grid;
                          else if (s == "monte_carlo") c.classical.bundle.quadrature = emzi::RayBundleSpec::Quadrature::monte_carlo;
                          else ctx.fail("expected grid or monte_carlo");
                        },
                        [](const RunConfig& c) {
                          return std::string(c.classical.bundle.quadrature == emzi::RayBundleSpec::Quadrature::monte_carlo
                                                 ? "monte_carlo"
                                                 : "grid");
                        }};
    cl["n_rays"] = count([](auto& c) -> auto& { return c.classical.bundle.n_rays; }, 1, 100000000);

    auto& scan = t["scan"];
    scan["shift_start"] = quantity([](auto& c) -> auto& { return c.scan.shift_start; }, kLength, Sign::any);
    scan["shift_stop"] = quantity([](auto& c) -> auto& { return c.scan.shift_stop; }, kLength, Sign::any);
    scan["shift_step"] = quantity([](auto& c) -> auto& { return c.scan.shift_step; }, kLength, Sign::positive);
    scan["port"] = port([](auto& c) -> auto& { return c.scan.port; });
    scan["detector_offset"] = quantity([](auto& c) -> auto& { return c.scan.detector_offset; }, kLength, Sign::any);
    scan["period_min"] = quantity([](auto& c) -> auto& { return c.scan.period_min; }, kLength, Sign::positive);
    scan["period_max"] = quantity([](auto& c) -> auto& { return c.scan.period_max; }, kLength, Sign::positive);

    auto& map = t["map"];
    map["port"] = port([](auto& c) -> auto& { return c.map.port; });
    map["start"] = quantity([](auto& c) -> auto& { return c.map.start; }, kLength, Sign::any);
    map["stop"] = quantity([](auto& c) -> auto& { return c.map.stop; }, kLength, Sign::any);
    map["step"] = quantity([](auto& c) -> auto& { return c.map.step; }, kLength, Sign::positive);
    map["min_relative_flux"] = quantity([](auto& c) -> auto& { return c.map.min_relative_flux; }, kNone, Sign::non_negative);

    auto& noise = t["noise"];
    noise["count_rate"] = quantity([](auto& c) -> auto& { return c.noise.count_rate; }, kRate, Sign::non_negative);
    noise["dwell"] = quantity([](auto& c) -> auto& { return c.noise.dwell; }, kTime, Sign::positive);
    noise["sweeps"] = count([](auto& c) -> auto& { return c.noise.sweeps; }, 1, 100000);
    noise["drift"] = quantity([](auto& c) -> auto& { return c.noise.drift; }, kLength, Sign::non_negative);

    t["pattern"]["half_width"] = quantity([](auto& c) -> auto& { return c.pattern.half_width; }, kLength, Sign::positive);

    auto& tal = t["talbot"];
    tal["z_max"] = {[](RunConfig& c, std::string_view v, const Ctx& ctx) {
                      if (trim(v) == "auto") {
                        c.talbot.z_max = 0.0;
                        return;
                      }
                      c.talbot.z_max = parse_quantity(v, kLength, ctx);
                      check_sign(c.talbot.z_max, Sign::positive, ctx);
                    },
                    [](const RunConfig& c) { return c.talbot.z_max > 0.0 ? fmt17(c.talbot.z_max) + " m" : std::string("auto"); }};
    tal["n_planes"] = count([](auto& c) -> auto& { return c.talbot.n_planes; }, 1, 4096);
    tal["samples_per_period"] = count([](auto& c) -> auto& { return c.talbot.samples_per_period; }, 2, 4096);
    tal["n_periods"] = count([](auto& c) -> auto& { return c.talbot.n_periods; }, 1, 1024);

    auto& out = t["output"];
    out["directory"] = {[](RunConfig& c, std::string_view v, const Ctx& ctx) {
                          c.output_directory = trim(v);
                          if (c.output_directory.empty()) ctx.fail("must not be empty");
                        },
                        [](const RunConfig& c) { return c.output_directory; }};
    out["formats"] = {[](RunConfig& c, std::string_view v, const Ctx& ctx) {
                        bool csv = false;
                        c.write_svg = false;
                        for (const auto& f : split_list(v)) {
                          if (f == "csv") csv = true;
                          else if (f == "svg") c.write_svg = true;
                          else ctx.fail("unknown format '" + f + "' (allowed: csv, svg)");
                        }
                        if (!csv) ctx.fail("csv output cannot be disabled");
                      },
                      [](const RunConfig& c) { return std::string(c.write_svg ? "csv, svg" : "csv"); }};

    t["run"]["seed"] = count([](auto& c) -> auto& { return c.seed; }, 0);
    return t;
  }();
  return table;
}

void check_consistency(const RunConfig& c) {
  auto fail = [](const std::string& key, const std::string& why) { throw ConfigError(key, 0, key + ": " + why); };
  if (c.apparatus.open_fraction >= 1.0) fail("geometry.open_fraction", "must lie in (0, 1)");
  if (c.scan.shift_stop < c.scan.shift_start) fail("scan.shift_stop", "must not be below shift_start");
  if (!(c.scan.period_max > c.scan.period_min)) fail("scan.period_max", "must exceed period_min");
  if (c.map.stop < c.map.start) fail("map.stop", "must not be below start");
  if (c.coherence.max_source_points < c.coherence.n_source_points) {
    fail("coherence.max_source_points", "must be at least n_source_points");
  }
  for (double e : c.energies_ev) {
    try {
      (void)c.geometry(e);
    } catch (const emzi::DomainError& err) {
      fail("geometry", err.what());
    }
  }
}

}  // namespace

emzi::GeometrySpec RunConfig::geometry(double energy_ev) const {
  return emzi::build_geometry(apparatus, emzi::BeamSpec::from_electron_volts(energy_ev, energy_spread_ev));
}

emzi::SamplingOptions RunConfig::sampling_options() const {
  emzi::SamplingOptions o;
  o.dx = dx;
  o.n_samples = n_samples;
  return o;
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  const auto& table = schema();
  std::istringstream in(text);
  std::string raw, section;
  std::size_t line_no = 0, settings = 0;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line, line_no, "line " + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!table.count(section)) {
        throw ConfigError(section, line_no, "line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(line, line_no, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw ConfigError(key, line_no, "line " + std::to_string(line_no) + ": key '" + key + "' outside any section");
    }
    const std::string full = section + "." + key;
    const auto& keys = table.at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError(full, line_no, "line " + std::to_string(line_no) + ": unknown key '" + full + "'");
    if (!seen.insert(full).second) {
      throw ConfigError(full, line_no, "line " + std::to_string(line_no) + ": duplicate key '" + full + "'");
    }
    if (value.empty()) throw ConfigError(full, line_no, "line " + std::to_string(line_no) + ": key '" + full + "' has no value");
    it->second.parse(c, value, Ctx{full, line_no});
    ++settings;
  }
  if (settings == 0) throw ConfigError("", 0, "config contains no settings");
  check_consistency(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("", 0, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::string> render_config(const RunConfig& c) {
  std::vector<std::string> out;
  for (const auto& [section, keys] : schema()) {
    out.push_back("[" + section + "]");
    for (const auto& [key, k] : keys) out.push_back(key + " = " + k.render(c));
  }
  return out;
}

}  // namespace sim
