// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
//
// Persistence: model documents ("model-v1"), key/value run configuration,
// run manifests ("manifest-v1") with SHA-256 content hashes, and (t, f) CSV.
#pragma once

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/uuid/uuid.hpp>
#include <boost/uuid/uuid_generators.hpp>
#include <boost/uuid/uuid_io.hpp>

#include "json.hpp"
#include "pam/error.hpp"
#include "pam/model.hpp"
#include "pam/sde.hpp"

#ifndef PAM_VERSION
#define PAM_VERSION "0.1.0"
#endif

namespace pam::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kModelSchema = "model-v1";
inline constexpr const char* kManifestSchema = "manifest-v1";
inline constexpr const char* kCodeVersion = PAM_VERSION;

//---------------------------------------------------------------------------//
// Files and hashing
//---------------------------------------------------------------------------//

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path.string());
    out << content;
    require(static_cast<bool>(out), ErrorKind::Io, "write failed for " + path.string());
}

inline std::string sha256_hex(const std::string& data)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    require(EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) == 1,
            ErrorKind::NumericalFailure, "SHA-256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int{md[i]};
    return os.str();
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp = std::chrono::system_clock::now())
{
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string new_uuid() { return boost::uuids::to_string(boost::uuids::random_generator()()); }

//---------------------------------------------------------------------------//
// Model documents
//---------------------------------------------------------------------------//

inline json nonlinearity_to_json(const Nonlinearity& s)
{
    json j;
    if (s.is_linear()) {
        j["kind"] = "linear";
        j["slope"] = s.slope();
    } else if (s.kind() == Nonlinearity::Kind::Tabulated) {
        j["kind"] = "tabulated";
        json knots = json::array();
        for (const auto& [z, v] : s.knots()) knots.push_back({z, v});
        j["knots"] = knots;
    } else {
        j["kind"] = "custom";
    }
    j["lip"] = s.lip();
    j["lower"] = s.lower();
    return j;
}

inline json model_to_json(const Model& m)
{
    json j;
    j["schema"] = kModelSchema;
    j["dimension"] = m.tau.dim();
    json support = json::array();
    for (const auto& jump : m.tau.jumps()) support.push_back({jump.site, jump.probability});
    j["support"] = support;
    j["sigma"] = nonlinearity_to_json(m.sigma);
    return j;
}

/// Parses and validates a model document. Malformed documents raise Parse;
/// well-formed but invalid models raise the validation error.
inline Model model_from_json(const json& j)
{
    Model m;
    std::vector<Jump> jumps;
    int dim = 0;
    Nonlinearity sigma = Nonlinearity::linear(1.0);
    try {
        if (j.contains("schema"))
            require(j.at("schema").get<std::string>() == kModelSchema, ErrorKind::Parse,
                    "unsupported model schema " + j.at("schema").get<std::string>());
        dim = j.at("dimension").get<int>();
        for (const auto& e : j.at("support")) {
            require(e.is_array() && e.size() == 2, ErrorKind::Parse, "support entries are [[x...], p]");
            jumps.push_back({e.at(0).get<Site>(), e.at(1).get<double>()});
        }
        if (j.contains("sigma")) {
            const auto& s = j.at("sigma");
            const auto kind = s.value("kind", std::string("linear"));
            if (kind == "linear") {
                const double slope = s.value("slope", s.value("lip", 1.0));
                sigma = Nonlinearity::linear(slope);
                require(!s.contains("lip") || s.at("lip").get<double>() == std::abs(slope),
                        ErrorKind::InvalidNonlinearity, "linear sigma needs lip = |slope|");
                require(!s.contains("lower") || s.at("lower").get<double>() == std::abs(slope),
                        ErrorKind::InvalidNonlinearity, "linear sigma needs lower = |slope|");
            } else if (kind == "tabulated") {
                std::vector<std::pair<double, double>> knots;
                for (const auto& k : s.at("knots")) knots.emplace_back(k.at(0).get<double>(), k.at(1).get<double>());
                sigma = Nonlinearity::tabulated(std::move(knots), s.at("lip").get<double>(),
                                                s.at("lower").get<double>());
            } else {
                throw Error(ErrorKind::Parse, "unknown sigma kind '" + kind + "'");
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("malformed model document: ") + e.what());
    }
    m.tau = validate_step_distribution(std::move(jumps), dim);
    validate_nonlinearity(sigma);
    m.sigma = std::move(sigma);
    return m;
}

/// Built-in names: srw1..srw4 (nearest-neighbour walk with sigma(z) = z).
inline bool is_builtin_model(const std::string& name)
{
    return name.size() == 4 && name.rfind("srw", 0) == 0 && name[3] >= '1' && name[3] <= '4';
}

inline Model builtin_model(const std::string& name)
{
    require(is_builtin_model(name), ErrorKind::InvalidArgument, "unknown builtin model " + name);
    return {builtin_laplacian(name[3] - '0'), Nonlinearity::linear(1.0)};
}

/// A built-in name or a path to a model document.
inline Model load_model(const std::string& spec)
{
    if (is_builtin_model(spec)) return builtin_model(spec);
    const auto text = read_file(spec);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, spec + ": " + e.what());
    }
    return model_from_json(j);
}

inline std::string model_hash(const Model& m) { return sha256_hex(model_to_json(m).dump()); }

//---------------------------------------------------------------------------//
// Configuration
//---------------------------------------------------------------------------//

/// Flat key = value document with [section] headers and '#' or ';' comments.
class Config {
  public:
    Config() = default;

    static Config parse(const std::string& text, const std::string& origin = "config")
    {
        std::string cleaned;
        std::istringstream in(text);
        for (std::string line; std::getline(in, line);) {
            // Allow trailing '#' comments and TOML-style quoted strings.
            bool quoted = false;
            std::size_t cut = line.size();
            for (std::size_t i = 0; i < line.size(); ++i) {
                if (line[i] == '"') quoted = !quoted;
                if (!quoted && line[i] == '#') {
                    cut = i;
                    break;
                }
            }
            line.resize(cut);
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                std::string value = boost::trim_copy(line.substr(eq + 1));
                if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
                    value = value.substr(1, value.size() - 2);
                line = boost::trim_copy(line.substr(0, eq)) + " = " + value;
            }
            cleaned += line + '\n';
        }
        Config c;
        try {
            std::istringstream ss(cleaned);
            boost::property_tree::ini_parser::read_ini(ss, c.tree_);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw Error(ErrorKind::Parse, origin + ": " + e.message() + " at line " + std::to_string(e.line()));
        }
        return c;
    }

    static Config load(const std::filesystem::path& path) { return parse(read_file(path), path.string()); }

    bool has(const std::string& section, const std::string& key) const
    {
        return static_cast<bool>(tree_.get_child_optional(section + "." + key));
    }

    template <class T>
    T get(const std::string& section, const std::string& key, T fallback) const
    {
        const auto path = section + "." + key;
        const auto raw = tree_.get_optional<std::string>(path);
        if (!raw) return fallback;
        try {
            return tree_.get<T>(path);
        } catch (const boost::property_tree::ptree_error&) {
            throw Error(ErrorKind::Parse, "bad value for " + path + ": '" + *raw + "'");
        }
    }

    std::string get(const std::string& section, const std::string& key, const char* fallback) const
    {
        return get<std::string>(section, key, std::string(fallback));
    }

    /// Comma-separated list, or "start:stop:count" for an evenly spaced grid.
    std::vector<double> get_list(const std::string& section, const std::string& key,
                                 std::vector<double> fallback) const
    {
        const auto raw = tree_.get_optional<std::string>(section + "." + key);
        if (!raw) return fallback;
        return parse_list(*raw);
    }

    static std::vector<double> parse_list(const std::string& raw)
    {
        std::vector<double> out;
        std::string s = boost::trim_copy(raw);
        if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
        try {
            if (s.find(':') != std::string::npos) {
                std::vector<std::string> parts;
                boost::split(parts, s, boost::is_any_of(":"));
                require(parts.size() == 3, ErrorKind::Parse, "range must be start:stop:count");
                const double a = std::stod(parts[0]), b = std::stod(parts[1]);
                const int n = std::stoi(parts[2]);
                require(n >= 1, ErrorKind::Parse, "range count must be >= 1");
                for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
                return out;
            }
            std::vector<std::string> parts;
            boost::split(parts, s, boost::is_any_of(","));
            for (auto& p : parts) {
                boost::trim(p);
                if (!p.empty()) out.push_back(std::stod(p));
            }
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::Parse, "bad number list '" + raw + "'");
        }
        return out;
    }

    const boost::property_tree::ptree& tree() const noexcept { return tree_; }

  private:
    boost::property_tree::ptree tree_;
};

inline Scheme parse_scheme(const std::string& s)
{
    if (s == "euler" || s == "euler-maruyama") return Scheme::EulerMaruyama;
    if (s == "split" || s == "multiplicative-split") return Scheme::MultiplicativeSplit;
    throw Error(ErrorKind::Parse, "unknown scheme '" + s + "' (euler | split)");
}

inline const char* scheme_name(Scheme s) { return s == Scheme::EulerMaruyama ? "euler" : "split"; }

inline BoxPolicy parse_box(const std::string& s, int radius)
{
    if (s == "horizon") return BoxPolicy::horizon();
    if (s == "fixed") return BoxPolicy::fixed(radius);
    if (s == "growth") return BoxPolicy::growth(radius);
    throw Error(ErrorKind::Parse, "unknown box policy '" + s + "' (horizon | fixed | growth)");
}

inline const char* box_name(const BoxPolicy& b)
{
    switch (b.kind) {
    case BoxPolicy::Kind::Horizon: return "horizon";
    case BoxPolicy::Kind::Fixed: return "fixed";
    case BoxPolicy::Kind::Growth: return "growth";
    }
    return "horizon";
}

/// Lattice run parameters from a section (keys as in config_schema()); absent
/// keys keep the values of `p`.
inline SimParams sim_params_from(const Config& c, const std::string& section, SimParams p = {})
{
    p.lambda = c.get(section, "lambda", p.lambda);
    p.c0 = c.get(section, "c0", p.c0);
    p.dt = c.get(section, "dt", p.dt);
    p.horizon = c.get(section, "T", p.horizon);
    p.replicas = c.get<std::size_t>(section, "replicas", p.replicas);
    p.seed = c.get<std::uint64_t>(section, "seed", p.seed);
    if (c.has(section, "scheme")) p.scheme = parse_scheme(c.get(section, "scheme", ""));
    if (c.has(section, "box") || c.has(section, "box_radius"))
        p.box = parse_box(c.get(section, "box", box_name(p.box)), c.get(section, "box_radius", p.box.radius));
    p.samples_per_decade = c.get(section, "samples_per_decade", p.samples_per_decade);
    p.first_sample = c.get(section, "first_sample", p.first_sample);
    p.extinction_mass = c.get(section, "extinction_mass", p.extinction_mass);
    p.snapshot_times = c.get_list(section, "snapshot_times", p.snapshot_times);
    return p;
}

inline json sim_params_to_json(const SimParams& p)
{
    return {{"lambda", p.lambda},
            {"c0", p.c0},
            {"dt", p.dt},
            {"T", p.horizon},
            {"replicas", p.replicas},
            {"seed", p.seed},
            {"scheme", scheme_name(p.scheme)},
            {"box", box_name(p.box)},
            {"box_radius", p.box.radius},
            {"samples_per_decade", p.samples_per_decade},
            {"first_sample", p.first_sample},
            {"extinction_mass", p.extinction_mass},
            {"snapshot_times", p.snapshot_times}};
}

/// Text printed by --help-config.
inline std::string config_schema()
{
    return R"(# pamctl configuration: key = value lines grouped in [sections].
# Lists are comma separated or start:stop:count. Comments start with '#'.

[model]
name = srw1                 # srw1..srw4, or
# file = path/to/model.json # model-v1 document

[simulate]                  # lattice SHE/PAM from c0 delta_0
lambda = 2.0
c0 = 1.0
dt = 0.001
T = 10.0
replicas = 100
seed = 1
scheme = euler              # euler | split (split needs linear sigma)
box = horizon               # horizon | fixed | growth
box_radius = 0              # fixed/growth radius (0 = horizon value)
samples_per_decade = 60
first_sample = 0.01
extinction_mass = 0.0       # stop stepping at this mass (0 = never)
snapshot_times =            # field snapshots, e.g. 1,10
eta = 0.5                   # moment reported in moments.csv

[sweep]                     # same keys as [simulate] plus
lambdas = 0.5:8:6
threshold = 0.25              # default c0/4

[continuum]                 # 1-D stochastic heat equation
lambda = 1.0
dx = 0.1
dt = 0.0                    # 0 = dx^2/2
T = 50.0
half_width = 0.0            # 0 = 5 sqrt(T) + 10
replicas = 100
seed = 1
samples_per_decade = 30
first_sample = 0.01
)";
}

//---------------------------------------------------------------------------//
// Manifest
//---------------------------------------------------------------------------//

/// Reproducibility record. Identical inputs give identical output files; the
/// campaign id and timestamps are the only fields that differ between runs.
class Manifest {
  public:
    Manifest(std::string command, std::uint64_t seed)
        : command_(std::move(command)), seed_(seed), campaign_id_(new_uuid()), started_at_(utc_timestamp())
    {
    }

    void set_model(const Model& m, const std::string& label)
    {
        model_hash_ = model_hash(m);
        model_label_ = label;
    }
    void set_params(json p) { params_ = std::move(p); }
    void set_kind(std::string k) { kind_ = std::move(k); }

    /// Writes `content` under `dir / name` and records its hash.
    void write_output(const std::filesystem::path& dir, const std::string& name, const std::string& content)
    {
        write_file(dir / name, content);
        outputs_.push_back({name, sha256_hex(content)});
    }

    json to_json() const
    {
        json j;
        j["schema"] = kManifestSchema;
        j["campaignId"] = campaign_id_;
        j["command"] = command_;
        j["model"] = kind_;
        j["seed"] = seed_;
        j["rng"] = "philox4x32-10 keyed by (seed, stream, replicaId, stepIndex) seeding splitmix64; site order";
        if (!model_hash_.empty()) {
            j["modelHash"] = model_hash_;
            j["modelSource"] = model_label_;
        }
        j["params"] = params_;
        j["codeVersion"] = kCodeVersion;
        j["startedAt"] = started_at_;
        j["finishedAt"] = utc_timestamp();
        json outs = json::array();
        for (const auto& [path, hash] : outputs_) outs.push_back({{"path", path}, {"sha256", hash}});
        j["outputs"] = outs;
        return j;
    }

    void save(const std::filesystem::path& dir, const std::string& name = "manifest.json") const
    {
        write_file(dir / name, to_json().dump(2) + "\n");
    }

  private:
    std::string command_;
    std::uint64_t seed_;
    std::string campaign_id_;
    std::string started_at_;
    std::string kind_ = "lattice";
    std::string model_hash_;
    std::string model_label_;
    json params_ = json::object();
    std::vector<std::pair<std::string, std::string>> outputs_;
};

struct ManifestCheck {
    bool ok = true;
    std::vector<std::string> problems;
};

/// Every listed output exists under `dir` and matches its recorded hash.
inline ManifestCheck verify_manifest(const std::filesystem::path& dir, const json& manifest)
{
    ManifestCheck c;
    if (manifest.value("schema", std::string()) != kManifestSchema) {
        c.ok = false;
        c.problems.push_back("schema is not manifest-v1");
        return c;
    }
    for (const auto& o : manifest.at("outputs")) {
        const auto path = dir / o.at("path").get<std::string>();
        if (!std::filesystem::exists(path)) {
            c.ok = false;
            c.problems.push_back("missing " + path.string());
        } else if (sha256_hex(read_file(path)) != o.at("sha256").get<std::string>()) {
            c.ok = false;
            c.problems.push_back("hash mismatch for " + path.string());
        }
    }
    return c;
}

//---------------------------------------------------------------------------//
// (t, f) CSV
//---------------------------------------------------------------------------//

struct Series {
    std::vector<double> t;
    std::vector<double> f;
};

/// Two numeric columns; a non-numeric first line is taken as a header.
inline Series parse_series_csv(const std::string& text, const std::string& origin = "csv")
{
    Series s;
    std::istringstream in(text);
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        boost::trim(line);
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> cells;
        boost::split(cells, line, boost::is_any_of(","));
        require(cells.size() >= 2, ErrorKind::Parse, origin + ": line " + std::to_string(line_no) + " needs 2 columns");
        try {
            std::size_t used = 0;
            const double t = std::stod(cells[0], &used);
            const double f = std::stod(cells[1]);
            s.t.push_back(t);
            s.f.push_back(f);
        } catch (const std::logic_error&) {
            require(s.t.empty(), ErrorKind::Parse, origin + ": non-numeric value on line " + std::to_string(line_no));
        }
    }
    require(!s.t.empty(), ErrorKind::EmptyInput, origin + ": no data rows");
    return s;
}

inline std::string series_csv(const Series& s, const std::string& header = "t,f")
{
    std::ostringstream os;
    os << std::setprecision(17) << header << '\n';
    for (std::size_t i = 0; i < s.t.size(); ++i) os << s.t[i] << ',' << s.f[i] << '\n';
    return os.str();
}

/// Reads the trajectory CSV (replicaId,t,mass,qv) back into per-replica paths.
inline std::vector<MassTrajectory> parse_trajectory_csv(const std::string& text, const std::string& origin = "csv")
{
    std::vector<MassTrajectory> out;
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::EmptyInput, origin + ": empty file");
    boost::trim(line);
    require(line == "replicaId,t,mass,qv", ErrorKind::Parse, origin + ": expected header replicaId,t,mass,qv");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        boost::trim(line);
        if (line.empty()) continue;
        std::vector<std::string> c;
        boost::split(c, line, boost::is_any_of(","));
        require(c.size() == 4, ErrorKind::Parse, origin + ": line " + std::to_string(line_no) + " needs 4 columns");
        try {
            const auto id = static_cast<std::size_t>(std::stoull(c[0]));
            if (out.empty() || out.back().replica_id != id) {
                out.emplace_back();
                out.back().replica_id = id;
            }
            auto& tr = out.back();
            tr.times.push_back(std::stod(c[1]));
            tr.mass.push_back(std::stod(c[2]));
            tr.qv.push_back(std::stod(c[3]));
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::Parse, origin + ": non-numeric value on line " + std::to_string(line_no));
        }
    }
    require(!out.empty(), ErrorKind::EmptyInput, origin + ": no data rows");
    return out;
}

}  // namespace pam::io
