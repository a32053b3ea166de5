#include "orca/constants.hpp"

#include "orca/error.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace orca {

namespace {

bool is_half_integer(double x) {
    const double twice = 2.0 * x;
    return x >= 0.0 && std::abs(twice - std::round(twice)) < 1e-12;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

using Setter = std::function<void(AtomicConstants&, const std::string&)>;

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("constants: value for '" + key + "' is not a number: " + v);
    }
}

void add_manifold_keys(std::map<std::string, Setter>& keys, const std::string& prefix,
                       ManifoldSpec AtomicConstants::*member) {
    auto num = [&keys, prefix, member](const std::string& name, double ManifoldSpec::*field) {
        const std::string key = prefix + "." + name;
        keys[key] = [key, member, field](AtomicConstants& c, const std::string& v) {
            (c.*member).*field = parse_double(key, v);
        };
    };
    num("j", &ManifoldSpec::j);
    num("i", &ManifoldSpec::i);
    num("a_hfs_mhz", &ManifoldSpec::a_hfs_mhz);
    num("b_hfs_mhz", &ManifoldSpec::b_hfs_mhz);
    num("g_j", &ManifoldSpec::g_j);
    num("g_i", &ManifoldSpec::g_i);
    keys[prefix + ".label"] = [member](AtomicConstants& c, const std::string& v) { (c.*member).label = v; };
    keys[prefix + ".l"] = [prefix, member](AtomicConstants& c, const std::string& v) {
        (c.*member).l = static_cast<int>(parse_double(prefix + ".l", v));
    };
    keys[prefix + ".first_index"] = [prefix, member](AtomicConstants& c, const std::string& v) {
        (c.*member).first_index = static_cast<int>(parse_double(prefix + ".first_index", v));
    };
}

std::map<std::string, Setter> constant_keys() {
    std::map<std::string, Setter> keys;
    add_manifold_keys(keys, "ground", &AtomicConstants::ground);
    add_manifold_keys(keys, "intermediate", &AtomicConstants::intermediate);
    add_manifold_keys(keys, "upper", &AtomicConstants::upper);
    auto num = [&keys](const std::string& key, double AtomicConstants::*field) {
        keys[key] = [key, field](AtomicConstants& c, const std::string& v) { c.*field = parse_double(key, v); };
    };
    num("bohr_magneton_mhz_per_mt", &AtomicConstants::bohr_magneton_mhz_per_mt);
    num("boltzmann_j_per_k", &AtomicConstants::boltzmann_j_per_k);
    num("atomic_mass_unit_kg", &AtomicConstants::atomic_mass_unit_kg);
    num("mass_amu", &AtomicConstants::mass_amu);
    num("signal_wavelength_nm", &AtomicConstants::signal_wavelength_nm);
    num("control_wavelength_nm", &AtomicConstants::control_wavelength_nm);
    num("intermediate_linewidth_mhz", &AtomicConstants::intermediate_linewidth_mhz);
    num("upper_linewidth_mhz", &AtomicConstants::upper_linewidth_mhz);
    keys["version"] = [](AtomicConstants& c, const std::string& v) { c.version = v; };
    return keys;
}

} // namespace

int ManifoldSpec::dimension() const {
    return static_cast<int>(std::lround((2.0 * j + 1.0) * (2.0 * i + 1.0)));
}

void ManifoldSpec::validate() const {
    if (!is_half_integer(j) || !is_half_integer(i))
        throw StructuralError("manifold " + label + ": J and I must be non-negative half-integers");
    if (l < 0 || std::abs(j - l) > 0.5 + 1e-12)
        throw StructuralError("manifold " + label + ": J incompatible with L for a single electron");
    if (b_hfs_mhz != 0.0 && (j < 1.0 || i < 1.0))
        throw StructuralError("manifold " + label + ": quadrupole constant must vanish for J or I = 1/2");
}

const ManifoldSpec& AtomicConstants::manifold(const std::string& name) const {
    for (const ManifoldSpec* m : {&ground, &intermediate, &upper})
        if (m->label == name) return *m;
    throw DomainError("unknown manifold '" + name + "'");
}

AtomicConstants builtin_constants() {
    AtomicConstants c;
    c.version = "rb87-2024.1";
    c.ground = {"5S1/2", 0, 0.5, 1.5, 3417.341305452, 0.0, 2.00233113, -0.0009951414, 1};
    c.intermediate = {"5P3/2", 1, 1.5, 1.5, 84.7185, 12.4965, 1.3362, -0.0009951414, 9};
    c.upper = {"5D5/2", 2, 2.5, 1.5, -16.801, 3.645, 1.2004, -0.0009951414, 25};
    return c;
}

AtomicConstants load_constants(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open constants file " + path.string());

    AtomicConstants c = builtin_constants();
    const auto keys = constant_keys();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = keys.find(key);
        if (it == keys.end())
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        it->second(c, value);
    }
    for (const ManifoldSpec* m : {&c.ground, &c.intermediate, &c.upper}) m->validate();
    return c;
}

AtomicConstants resolve_constants(const std::string& explicit_path) {
    if (!explicit_path.empty()) return load_constants(explicit_path);
    if (const char* env = std::getenv("ORCA_CONSTANTS"); env != nullptr && *env != '\0')
        return load_constants(env);
#ifdef ORCA_DEFAULT_CONSTANTS_PATH
    if (std::filesystem::exists(ORCA_DEFAULT_CONSTANTS_PATH)) return load_constants(ORCA_DEFAULT_CONSTANTS_PATH);
#endif
    return builtin_constants();
}

} // namespace orca
