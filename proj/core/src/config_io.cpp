#include "heterodyn/config_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "heterodyn/error.hpp"

namespace heterodyn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_number(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(d))
    throw ConfigError("key '" + key + "': not a finite number: '" + v + "'");
  return d;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* map_kind_name(MapKind k) {
  switch (k) {
    case MapKind::finance: return "finance";
    case MapKind::tent: return "tent";
    case MapKind::logistic: return "logistic";
  }
  return "finance";
}

const char* profile_kind_name(ProfileKind k) { return k == ProfileKind::constant ? "const" : "affine"; }

ProfileKind parse_profile_kind(const std::string& key, const std::string& v) {
  if (v == "const") return ProfileKind::constant;
  if (v == "affine") return ProfileKind::affine;
  throw ConfigError("key '" + key + "': expected const or affine, got '" + v + "'");
}

// Profiles are assembled after all keys are read, so the kind may follow its coefficients.
struct ProfileKeys {
  std::optional<ProfileKind> kind;
  std::optional<double> value, intercept, slope;
};

Profile build_profile(const std::string& name, const ProfileKeys& k, const Profile& fallback) {
  const ProfileKind kind = k.kind.value_or(
      (k.intercept || k.slope) ? ProfileKind::affine
                               : (k.value ? ProfileKind::constant : fallback.kind));
  if (kind == ProfileKind::constant) {
    if (k.intercept || k.slope)
      throw ConfigError(name + "_kind is const but affine coefficients were given");
    return Profile::constant(k.value.value_or(fallback.kind == ProfileKind::constant ? fallback.intercept : 0.0));
  }
  if (k.value) throw ConfigError(name + "_kind is affine but " + name + "_const was given");
  if (!k.intercept || !k.slope)
    throw ConfigError(name + "_kind is affine: both " + name + "_intercept and " + name + "_slope are required");
  return Profile::affine(*k.intercept, *k.slope);
}

}  // namespace

ModelSpec parse_model_spec(std::istream& is) {
  ModelSpec spec;
  ProfileKeys sig, s;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");

    if (key == "map_kind") {
      if (val == "finance") spec.map_kind = MapKind::finance;
      else if (val == "tent") spec.map_kind = MapKind::tent;
      else if (val == "logistic") spec.map_kind = MapKind::logistic;
      else throw ConfigError("key 'map_kind': expected finance, tent or logistic, got '" + val + "'");
    } else if (key == "gamma0") spec.map.gamma0 = to_number(key, val);
    else if (key == "omega") spec.map.omega = to_number(key, val);
    else if (key == "c") spec.map.c = to_number(key, val);
    else if (key == "sigma_eps_bar") spec.map.sigma_eps_bar = to_number(key, val);
    else if (key == "map_peak") spec.map_peak = to_number(key, val);
    else if (key == "map_base") spec.map_base = to_number(key, val);
    else if (key == "a") spec.a = to_number(key, val);
    else if (key == "upsilon") spec.upsilon = to_number(key, val);
    else if (key == "sigma_kind") sig.kind = parse_profile_kind(key, val);
    else if (key == "sigma_const") sig.value = to_number(key, val);
    else if (key == "sigma_intercept") sig.intercept = to_number(key, val);
    else if (key == "sigma_slope") sig.slope = to_number(key, val);
    else if (key == "s_kind") s.kind = parse_profile_kind(key, val);
    else if (key == "s_const") s.value = to_number(key, val);
    else if (key == "s_intercept") s.intercept = to_number(key, val);
    else if (key == "s_slope") s.slope = to_number(key, val);
    else if (key == "psi_kind") {
      if (val == "uniform") spec.psi = PsiKind::uniform;
      else if (val == "triangular") spec.psi = PsiKind::triangular;
      else throw ConfigError("key 'psi_kind': expected uniform or triangular, got '" + val + "'");
    } else if (key == "epsilon") spec.epsilon = to_number(key, val);
    else if (key == "alpha") spec.alpha = to_number(key, val);
    else throw ConfigError("unknown key '" + key + "'");
  }
  spec.sigma = build_profile("sigma", sig, spec.sigma);
  spec.s = build_profile("s", s, spec.s);
  return spec;
}

ModelSpec parse_model_spec_string(const std::string& text) {
  std::istringstream is(text);
  return parse_model_spec(is);
}

ModelSpec load_model_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  return parse_model_spec(f);
}

std::string serialize_model_spec(const ModelSpec& spec) {
  std::map<std::string, std::string> kv;
  kv["map_kind"] = map_kind_name(spec.map_kind);
  kv["gamma0"] = fmt(spec.map.gamma0);
  kv["omega"] = fmt(spec.map.omega);
  kv["c"] = fmt(spec.map.c);
  kv["sigma_eps_bar"] = fmt(spec.map.sigma_eps_bar);
  kv["map_peak"] = fmt(spec.map_peak);
  kv["map_base"] = fmt(spec.map_base);
  kv["a"] = fmt(spec.a);
  kv["upsilon"] = fmt(spec.upsilon);
  auto put_profile = [&](const std::string& name, const Profile& p) {
    kv[name + "_kind"] = profile_kind_name(p.kind);
    if (p.kind == ProfileKind::constant) {
      kv[name + "_const"] = fmt(p.intercept);
    } else {
      kv[name + "_intercept"] = fmt(p.intercept);
      kv[name + "_slope"] = fmt(p.slope);
    }
  };
  put_profile("sigma", spec.sigma);
  put_profile("s", spec.s);
  kv["psi_kind"] = spec.psi == PsiKind::uniform ? "uniform" : "triangular";
  kv["epsilon"] = fmt(spec.epsilon);
  if (spec.alpha) kv["alpha"] = fmt(*spec.alpha);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t config_hash(const ModelSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_model_spec(spec)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace heterodyn
