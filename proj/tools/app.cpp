#include "app.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <list>
#include <map>
#include <sstream>

#include "command.hpp"
#include "rlad/error.hpp"

namespace rlad::cli {

namespace fs = std::filesystem;

std::string flag_name(const std::string& key)
{
    std::string f = key;
    std::replace(f.begin(), f.end(), '_', '-');
    return "--" + f;
}

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

Csv::Csv(const std::vector<std::string>& header)
{
    for (std::size_t k = 0; k < header.size(); ++k) {
        text_ += (k ? "," : "") + header[k];
    }
    text_ += '\n';
}

std::string Csv::cell(double x) { return fmt(x); }
std::string Csv::cell(std::size_t n) { return std::to_string(n); }
std::string Csv::cell(const std::string& s) { return s; }

double Run::real(const std::string& k) const { return cfg_.at(k).get<double>(); }
std::uint64_t Run::integer(const std::string& k) const { return cfg_.at(k).get<std::uint64_t>(); }
std::string Run::text(const std::string& k) const { return cfg_.at(k).get<std::string>(); }
bool Run::flag(const std::string& k) const { return cfg_.at(k).get<bool>(); }

std::vector<double> Run::reals(const std::string& k) const
{
    return cfg_.at(k).get<std::vector<double>>();
}

void Run::write(const std::string& path, const std::string& content)
{
    if (path.empty()) {
        out_ << content;
        return;
    }
    const fs::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path(), ec);
    }
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f || !(f << content) || !f.flush()) {
        throw IoError("cannot write " + path);
    }
    outputs_.push_back(path);
}

std::string Run::manifest_path() const
{
    if (!manifest_.empty()) {
        return manifest_;
    }
    return outputs_.empty() ? std::string() : outputs_.front() + ".manifest.json";
}

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot read " + path);
    }
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::size_t line_at(const std::string& text, std::size_t byte)
{
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(
                   std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

// Line of the first occurrence of "key" in the document, 0 when absent.
std::size_t line_of_key(const std::string& text, const std::string& key)
{
    const auto at = text.find('"' + key + '"');
    return at == std::string::npos ? 0 : line_at(text, at);
}

json parse_json_file(const std::string& path, const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
        const std::size_t line = line_at(text, byte);
        const std::size_t bol = text.rfind('\n', byte == 0 ? 0 : byte - 1);
        const std::size_t col = bol == std::string::npos ? byte + 1 : byte - bol;
        throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": malformed JSON");
    }
}

double parse_real(const std::string& s, const std::string& what)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) {
        throw UsageError("invalid number '" + s + "' for " + what);
    }
    if (!std::isfinite(v)) {
        throw DomainError(what + " must be finite, got " + s);
    }
    return v;
}

std::uint64_t parse_count(const std::string& s, const std::string& what)
{
    std::size_t used = 0;
    std::uint64_t v = 0;
    if (!s.empty() && s[0] != '-' && s[0] != '+') {
        try {
            v = std::stoull(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
    }
    if (used == 0 || used != s.size()) {
        throw UsageError("invalid non-negative integer '" + s + "' for " + what);
    }
    return v;
}

// "a:step:b" expands to a, a+step, ..., up to b.
void append_reals(const std::string& token, const std::string& what, std::vector<double>& out)
{
    const auto c1 = token.find(':');
    if (c1 == std::string::npos) {
        out.push_back(parse_real(token, what));
        return;
    }
    const auto c2 = token.find(':', c1 + 1);
    if (c2 == std::string::npos) {
        throw UsageError("range '" + token + "' for " + what + " must read start:step:stop");
    }
    const double a = parse_real(token.substr(0, c1), what);
    const double h = parse_real(token.substr(c1 + 1, c2 - c1 - 1), what);
    const double b = parse_real(token.substr(c2 + 1), what);
    if (!(h > 0.0) || b < a) {
        throw DomainError("range '" + token + "' for " + what + " needs step > 0 and stop >= start");
    }
    const auto n = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9));
    if (n > 10'000'000) {
        throw ResourceError("range '" + token + "' for " + what + " is too long");
    }
    for (std::size_t k = 0; k <= n; ++k) {
        out.push_back(a + static_cast<double>(k) * h);
    }
}

json from_flag(const Param& p, const std::vector<std::string>& raw)
{
    const std::string what = p.positional ? p.key : flag_name(p.key);
    switch (p.kind) {
    case Kind::real:
        return parse_real(raw.front(), what);
    case Kind::integer:
        return parse_count(raw.front(), what);
    case Kind::text:
        return raw.front();
    case Kind::reals: {
        std::vector<double> v;
        for (const auto& tok : raw) {
            append_reals(tok, what, v);
        }
        return v;
    }
    case Kind::flag:
        return true;
    }
    return nullptr;
}

// Checks a config-file value against the parameter kind; returns an empty string or
// the reason it was rejected.
std::string coerce(const Param& p, const json& v, json& out)
{
    if (v.is_null()) {
        out = nullptr;
        return {};
    }
    switch (p.kind) {
    case Kind::real:
        if (!v.is_number()) return "expects a number";
        out = v.get<double>();
        return {};
    case Kind::integer:
        if (v.is_number_unsigned()) {
            out = v.get<std::uint64_t>();
            return {};
        }
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
            out = static_cast<std::uint64_t>(v.get<std::int64_t>());
            return {};
        }
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) {
                out = static_cast<std::uint64_t>(d);
                return {};
            }
        }
        return "expects a non-negative integer";
    case Kind::text:
        if (v.is_string()) {
            out = v;
            return {};
        }
        if (v.is_number_integer()) {
            out = std::to_string(v.get<std::int64_t>());
            return {};
        }
        return "expects a string";
    case Kind::reals:
        if (v.is_number()) {
            out = json::array({v.get<double>()});
            return {};
        }
        if (!v.is_array()) return "expects an array of numbers";
        out = json::array();
        for (const auto& x : v) {
            if (!x.is_number()) return "expects an array of numbers";
            out.push_back(x.get<double>());
        }
        return {};
    case Kind::flag:
        if (!v.is_boolean()) return "expects true or false";
        out = v;
        return {};
    }
    return "has an unsupported type";
}

struct Source {
    std::string path;
    std::string text;
    json doc;
};

json resolve(const Command& cmd, const Source* file,
             const std::map<std::string, std::vector<std::string>>& flags)
{
    json cfg = json::object();
    for (const auto& p : cmd.params) {
        cfg[p.key] = p.fallback;
    }
    if (file != nullptr) {
        if (!file->doc.is_object()) {
            throw ConfigError(file->path + ":1: top level must be a JSON object");
        }
        for (const auto& [key, value] : file->doc.items()) {
            const std::size_t line = line_of_key(file->text, key);
            const std::string where =
                file->path + ":" + std::to_string(line == 0 ? 1 : line) + ": field '" + key + "'";
            if (key == "schema_version") {
                if (!value.is_number_integer() || value.get<int>() != kSchemaVersion) {
                    throw ConfigError(where + " must be " + std::to_string(kSchemaVersion));
                }
                continue;
            }
            const auto it = std::find_if(cmd.params.begin(), cmd.params.end(),
                                         [&](const Param& p) { return p.key == key; });
            if (it == cmd.params.end()) {
                throw ConfigError(where + " is not a parameter of '" + cmd.path + "'");
            }
            json v;
            if (const auto why = coerce(*it, value, v); !why.empty()) {
                throw ConfigError(where + " " + why);
            }
            cfg[key] = v;
        }
    }
    for (const auto& p : cmd.params) {
        if (const auto it = flags.find(p.key); it != flags.end()) {
            cfg[p.key] = from_flag(p, it->second);
        }
    }
    for (const auto& p : cmd.params) {
        if (p.required && cfg[p.key].is_null()) {
            throw UsageError("missing required parameter " +
                             (p.positional ? "<" + p.key + ">" : flag_name(p.key)));
        }
    }
    return cfg;
}

Source load_source(const std::string& path)
{
    Source s{path, read_file(path), {}};
    s.doc = parse_json_file(path, s.text);
    return s;
}

void execute(const Command& cmd, const json& cfg, std::ostream& out)
{
    const auto start = std::chrono::steady_clock::now();
    Run run(cfg, out);
    cmd.run(run);
    if (run.outputs().empty()) {
        return;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json m = json::object();
    m["schema_version"] = kSchemaVersion;
    m["tool"] = "rlad";
    m["tool_version"] = kToolVersion;
    m["subcommand"] = cmd.path;
    m["config"] = cfg;
    m["seed"] = cfg.contains("seed") ? cfg["seed"] : json(nullptr);
    m["outputs"] = run.outputs();
    m["threads"] = omp_get_max_threads();
    m["wall_seconds"] = seconds;
    const std::string path = run.manifest_path();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f || !(f << m.dump(2) << '\n') || !f.flush()) {
        throw IoError("cannot write manifest " + path);
    }
}

void rerun(const std::vector<Command>& cmds, const std::string& manifest_path,
           const std::string& out_dir, std::ostream& out)
{
    const Source src = load_source(manifest_path);
    const json& m = src.doc;
    const auto field_error = [&](const std::string& key, const std::string& why) {
        const std::size_t line = line_of_key(src.text, key);
        return ConfigError(manifest_path + ":" + std::to_string(line == 0 ? 1 : line) +
                           ": field '" + key + "' " + why);
    };
    if (!m.is_object()) {
        throw ConfigError(manifest_path + ":1: manifest must be a JSON object");
    }
    if (!m.contains("schema_version") || m["schema_version"] != kSchemaVersion) {
        throw field_error("schema_version", "must be " + std::to_string(kSchemaVersion));
    }
    if (!m.contains("subcommand") || !m["subcommand"].is_string()) {
        throw field_error("subcommand", "must name a subcommand");
    }
    const auto name = m["subcommand"].get<std::string>();
    const auto it = std::find_if(cmds.begin(), cmds.end(),
                                 [&](const Command& c) { return c.path == name; });
    if (it == cmds.end()) {
        throw field_error("subcommand", "names unknown subcommand '" + name + "'");
    }
    if (!m.contains("config") || !m["config"].is_object()) {
        throw field_error("config", "must be an object");
    }
    Source cfg_src{manifest_path, src.text, m["config"]};
    json cfg = resolve(*it, &cfg_src, {});
    if (!out_dir.empty()) {
        for (const auto& p : it->params) {
            if (p.role == Role::output_dir) {
                cfg[p.key] = out_dir;
            } else if (p.role == Role::output_file && cfg[p.key].is_string() &&
                       !cfg[p.key].get<std::string>().empty()) {
                cfg[p.key] =
                    (fs::path(out_dir) / fs::path(cfg[p.key].get<std::string>()).filename()).string();
            }
        }
    }
    execute(*it, cfg, out);
}

std::string type_name(const Param& p)
{
    if (p.role == Role::output_file) return "FILE";
    if (p.role == Role::output_dir) return "DIR";
    switch (p.kind) {
    case Kind::real: return "REAL";
    case Kind::integer: return "INT";
    case Kind::reals: return "REAL";
    default: return "TEXT";
    }
}

struct Bound {
    const Command* cmd = nullptr;
    CLI::App* app = nullptr;
    std::map<std::string, std::vector<std::string>> raw;
    std::map<std::string, bool> flags;
    std::map<std::string, CLI::Option*> options;
    std::string config;
};

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    const std::vector<Command> cmds = commands();

    CLI::App app{"Random link activation-deletion networks: exact solutions and simulation",
                 "rlad"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kToolVersion);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: all cores)")
        ->envname("RLAD_THREADS")
        ->check(CLI::NonNegativeNumber);

    std::list<Bound> bound;
    for (const auto& cmd : cmds) {
        CLI::App* parent = &app;
        std::istringstream words(cmd.path);
        std::vector<std::string> parts;
        for (std::string w; words >> w;) parts.push_back(w);
        for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
            CLI::App* next = nullptr;
            try {
                next = parent->get_subcommand(parts[k]);
            } catch (const CLI::OptionNotFound&) {
                next = parent->add_subcommand(parts[k], parts[k] + " commands");
                next->require_subcommand(1);
            }
            parent = next;
        }
        Bound& b = bound.emplace_back();
        b.cmd = &cmd;
        b.app = parent->add_subcommand(parts.back(), cmd.help);
        for (const auto& p : cmd.params) {
            std::string help = p.help;
            if (!p.fallback.is_null() && p.fallback != "" && help.find("[default:") == std::string::npos) {
                help += " [default: " + p.fallback.dump() + "]";
            }
            if (p.kind == Kind::flag) {
                b.options[p.key] = b.app->add_flag(flag_name(p.key), b.flags[p.key], help);
            } else if (p.positional) {
                b.options[p.key] =
                    b.app->add_option(p.key, b.raw[p.key], help)->expected(1)->type_name(type_name(p));
            } else {
                auto* o = b.app->add_option(flag_name(p.key), b.raw[p.key], help)->type_name(type_name(p));
                if (p.kind == Kind::reals) {
                    o->delimiter(',')->expected(1, CLI::detail::expected_max_vector_size);
                } else {
                    o->expected(1);
                }
                b.options[p.key] = o;
            }
        }
        b.app->add_option("--config", b.config, "JSON file with parameter values (flags win)");
    }
    std::string manifest_path;
    std::string rerun_dir;
    CLI::App* rerun_app = app.add_subcommand("rerun", "Repeat a run from its manifest");
    rerun_app->add_option("manifest", manifest_path, "Manifest written by an earlier run")
        ->required();
    rerun_app->add_option("--out-dir", rerun_dir, "Write outputs here instead of the original paths");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error[usage]: " << e.what() << "\n\n";
        CLI::App* deepest = &app;
        for (const auto& b : bound) {
            if (b.app->parsed()) deepest = b.app;
        }
        if (rerun_app->parsed()) deepest = rerun_app;
        err << deepest->help();
        return 2;
    }

    if (threads > 0) {
        omp_set_num_threads(threads);
    }

    try {
        if (rerun_app->parsed()) {
            rerun(cmds, manifest_path, rerun_dir, out);
            return 0;
        }
        for (auto& b : bound) {
            if (!b.app->parsed()) continue;
            std::map<std::string, std::vector<std::string>> given;
            for (const auto& p : b.cmd->params) {
                if (b.options[p.key]->count() > 0) {
                    given[p.key] = p.kind == Kind::flag ? std::vector<std::string>{}
                                                        : b.raw[p.key];
                }
            }
            std::optional<Source> file;
            if (!b.config.empty()) file = load_source(b.config);
            const json cfg = resolve(*b.cmd, file ? &*file : nullptr, given);
            execute(*b.cmd, cfg, out);
            return 0;
        }
        err << app.help();
        return 2;
    } catch (const UsageError& e) {
        err << "error[usage]: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error[" << category_name(e.category()) << "]: " << e.what() << '\n';
        return exit_code(e.category());
    } catch (const std::exception& e) {
        err << "error[internal]: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace rlad::cli
