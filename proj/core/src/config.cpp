#include "stefan/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

namespace stefan {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

// section -> key -> value
using Table = std::map<std::string, std::map<std::string, Entry>>;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"scenario",
       {"scenario", "n", "domain_min", "domain_max", "interface", "interface_value", "interface_amplitude",
        "snap_to_centers", "t_liquid", "t_solid"}},
      {"physics",
       {"st", "lambda_ratio", "diffusivity_ratio", "t_melt", "epsilon_kappa", "epsilon_v", "anisotropy",
        "anisotropy_strength"}},
      {"numerics",
       {"t_start", "t_end", "max_steps", "dt_rule", "dt_value", "cfl", "capillary_factor", "extension_tolerance",
        "coupling"}},
      {"output", {"output_every", "write_fields", "onset_factor"}},
  };
  return keys;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Table tokenize(std::string_view text) {
  Table table;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    std::string_view line = trim(raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!allowed_keys().count(section)) throw ParseError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (value.empty()) throw ParseError(line_no, "empty value for '" + key + "'");
    if (section.empty()) {
      // A bare scenario line ahead of any header belongs to [scenario].
      if (key != "scenario") throw ParseError(line_no, "key '" + key + "' outside any section");
      section = "scenario";
    }
    if (!allowed_keys().at(section).count(key))
      throw ParseError(line_no, "unknown key '" + key + "' in [" + section + "]");
    auto& sec = table[section];
    if (sec.count(key)) throw ParseError(line_no, "repeated key '" + key + "'");
    sec[key] = {value, line_no};
  }
  return table;
}

double to_double(const Entry& e, const std::string& key) {
  const std::string& s = e.value;
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(e.line, "'" + key + "' expects a number, got '" + s + "'");
  return v;
}

int to_int(const Entry& e, const std::string& key) {
  const std::string& s = e.value;
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(e.line, "'" + key + "' expects an integer, got '" + s + "'");
  return v;
}

bool to_bool(const Entry& e, const std::string& key) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw ParseError(e.line, "'" + key + "' expects true or false, got '" + e.value + "'");
}

template <class E, std::size_t N>
E to_enum(const Entry& e, const std::string& key, const std::array<std::pair<E, const char*>, N>& names) {
  for (const auto& [id, name] : names)
    if (e.value == name) return id;
  std::string opts;
  for (const auto& [id, name] : names) opts += (opts.empty() ? "" : ", ") + std::string(name);
  throw ParseError(e.line, "'" + key + "' must be one of " + opts + ", got '" + e.value + "'");
}

template <class E, std::size_t N>
const char* enum_name(E v, const std::array<std::pair<E, const char*>, N>& names) {
  for (const auto& [id, name] : names)
    if (id == v) return name;
  return "?";
}

constexpr std::array<std::pair<InitialInterface::Kind, const char*>, 4> kInterfaceNames{{
    {InitialInterface::Kind::Line, "line"},
    {InitialInterface::Kind::Circle, "circle"},
    {InitialInterface::Kind::Flower, "flower"},
    {InitialInterface::Kind::Layer, "layer"},
}};

constexpr std::array<std::pair<AnisotropyModel::Kind, const char*>, 3> kAnisotropyNames{{
    {AnisotropyModel::Kind::Isotropic, "isotropic"},
    {AnisotropyModel::Kind::Fourfold, "fourfold"},
    {AnisotropyModel::Kind::Sixfold, "sixfold"},
}};

constexpr std::array<std::pair<DtRule::Kind, const char*>, 4> kDtNames{{
    {DtRule::Kind::DerivedCfl, "cfl"},
    {DtRule::Kind::Fixed, "fixed"},
    {DtRule::Kind::Linear, "linear"},
    {DtRule::Kind::Quadratic, "quadratic"},
}};

constexpr std::array<std::pair<InterfaceCoupling, const char*>, 2> kCouplingNames{{
    {InterfaceCoupling::Implicit, "implicit"},
    {InterfaceCoupling::Lagged, "lagged"},
}};

}  // namespace

ParseError::ParseError(int line, const std::string& message)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

CaseConfig parse_config(std::string_view text) {
  const Table table = tokenize(text);
  const auto sc = table.find("scenario");
  if (sc == table.end() || !sc->second.count("scenario")) throw ParseError(0, "missing 'scenario' key");
  const Entry& se = sc->second.at("scenario");
  const auto scenario = scenario_from_name(se.value);
  if (!scenario) throw ParseError(se.line, "unknown scenario '" + se.value + "'");

  CaseConfig c = default_config(*scenario);
  auto get = [&](const std::string& section, const std::string& key) -> const Entry* {
    const auto s = table.find(section);
    if (s == table.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  };
  auto num = [&](const char* section, const char* key, double& out) {
    if (const Entry* e = get(section, key)) out = to_double(*e, key);
  };
  auto integer = [&](const char* section, const char* key, int& out) {
    if (const Entry* e = get(section, key)) out = to_int(*e, key);
  };
  auto flag = [&](const char* section, const char* key, bool& out) {
    if (const Entry* e = get(section, key)) out = to_bool(*e, key);
  };

  integer("scenario", "n", c.n);
  num("scenario", "domain_min", c.domain_min);
  num("scenario", "domain_max", c.domain_max);
  if (const Entry* e = get("scenario", "interface")) c.interface.kind = to_enum(*e, "interface", kInterfaceNames);
  num("scenario", "interface_value", c.interface.value);
  num("scenario", "interface_amplitude", c.interface.amplitude);
  flag("scenario", "snap_to_centers", c.interface.snap_to_centers);
  num("scenario", "t_liquid", c.t_liquid);
  num("scenario", "t_solid", c.t_solid);

  num("physics", "st", c.st);
  num("physics", "lambda_ratio", c.lambda_ratio);
  num("physics", "diffusivity_ratio", c.diffusivity_ratio);
  num("physics", "t_melt", c.t_melt);
  num("physics", "epsilon_kappa", c.eps_kappa);
  num("physics", "epsilon_v", c.eps_v);
  if (const Entry* e = get("physics", "anisotropy")) c.anisotropy = to_enum(*e, "anisotropy", kAnisotropyNames);
  num("physics", "anisotropy_strength", c.anisotropy_strength);

  num("numerics", "t_start", c.t_start);
  num("numerics", "t_end", c.t_end);
  integer("numerics", "max_steps", c.max_steps);
  if (const Entry* e = get("numerics", "dt_rule")) c.dt.kind = to_enum(*e, "dt_rule", kDtNames);
  num("numerics", "dt_value", c.dt.value);
  num("numerics", "cfl", c.cfl);
  num("numerics", "capillary_factor", c.capillary_factor);
  num("numerics", "extension_tolerance", c.extension_tolerance);
  if (const Entry* e = get("numerics", "coupling")) c.coupling = to_enum(*e, "coupling", kCouplingNames);

  integer("output", "output_every", c.output_every);
  flag("output", "write_fields", c.write_fields);
  num("output", "onset_factor", c.onset_factor);

  if (const auto err = validate(c)) throw ValidationError(*err);
  return c;
}

std::string serialize_config(const CaseConfig& c) {
  std::ostringstream os;
  auto kv = [&os](const char* key, const std::string& value) { os << key << " = " << value << '\n'; };
  auto d = [](double v) { return format_double(v); };
  os << "[scenario]\n";
  kv("scenario", std::string(scenario_name(c.scenario)));
  kv("n", std::to_string(c.n));
  kv("domain_min", d(c.domain_min));
  kv("domain_max", d(c.domain_max));
  kv("interface", enum_name(c.interface.kind, kInterfaceNames));
  kv("interface_value", d(c.interface.value));
  kv("interface_amplitude", d(c.interface.amplitude));
  kv("snap_to_centers", c.interface.snap_to_centers ? "true" : "false");
  kv("t_liquid", d(c.t_liquid));
  kv("t_solid", d(c.t_solid));
  os << "\n[physics]\n";
  kv("st", d(c.st));
  kv("lambda_ratio", d(c.lambda_ratio));
  kv("diffusivity_ratio", d(c.diffusivity_ratio));
  kv("t_melt", d(c.t_melt));
  kv("epsilon_kappa", d(c.eps_kappa));
  kv("epsilon_v", d(c.eps_v));
  kv("anisotropy", enum_name(c.anisotropy, kAnisotropyNames));
  kv("anisotropy_strength", d(c.anisotropy_strength));
  os << "\n[numerics]\n";
  kv("t_start", d(c.t_start));
  kv("t_end", d(c.t_end));
  kv("max_steps", std::to_string(c.max_steps));
  kv("dt_rule", enum_name(c.dt.kind, kDtNames));
  kv("dt_value", d(c.dt.value));
  kv("cfl", d(c.cfl));
  kv("capillary_factor", d(c.capillary_factor));
  kv("extension_tolerance", d(c.extension_tolerance));
  kv("coupling", enum_name(c.coupling, kCouplingNames));
  os << "\n[output]\n";
  kv("output_every", std::to_string(c.output_every));
  kv("write_fields", c.write_fields ? "true" : "false");
  kv("onset_factor", d(c.onset_factor));
  return os.str();
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const CaseConfig& cfg) {
  const std::uint64_t h = fnv1a(serialize_config(cfg));
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf.data(), 16);
}

}  // namespace stefan
