#pragma once

// Shared between the dispatcher (app.cpp) and the subcommand handlers (commands.cpp).

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace rlad::cli {

// Insertion-ordered so resolved configs and manifests follow declaration order.
using json = nlohmann::ordered_json;

/// Bad command line; exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Kind { real, integer, text, reals, flag };
enum class Role { value, output_file, output_dir };

struct Param {
    std::string key;  // config field; the flag is "--" + key with '_' -> '-'
    Kind kind;
    json fallback;    // null: unset
    std::string help;
    bool required = false;
    bool positional = false;
    Role role = Role::value;
};

std::string flag_name(const std::string& key);

/// Fixed-format CSV text: header row, numbers at 12 significant digits.
class Csv {
public:
    explicit Csv(const std::vector<std::string>& header);

    template <class... Cells>
    void row(const Cells&... cells)
    {
        std::string line;
        ((line += (line.empty() ? "" : ",") + cell(cells)), ...);
        text_ += line + '\n';
    }

    const std::string& str() const { return text_; }

private:
    static std::string cell(double x);
    static std::string cell(std::size_t n);
    static std::string cell(const std::string& s);
    static std::string cell(const char* s) { return s; }

    std::string text_;
};

std::string fmt(double x);

class Run {
public:
    Run(const json& cfg, std::ostream& out) : cfg_(cfg), out_(out) {}

    bool set(const std::string& k) const { return !cfg_.at(k).is_null(); }
    double real(const std::string& k) const;
    std::uint64_t integer(const std::string& k) const;
    std::string text(const std::string& k) const;
    std::vector<double> reals(const std::string& k) const;
    bool flag(const std::string& k) const;
    const json& config() const { return cfg_; }

    /// Writes to `path`, or to the output stream when path is empty.
    void write(const std::string& path, const std::string& content);
    const std::vector<std::string>& outputs() const { return outputs_; }

    /// Defaults to the first output file + ".manifest.json".
    void set_manifest_path(std::string p) { manifest_ = std::move(p); }
    std::string manifest_path() const;

private:
    const json& cfg_;
    std::ostream& out_;
    std::vector<std::string> outputs_;
    std::string manifest_;
};

struct Command {
    std::string path;  // e.g. "mlf eval"
    std::string help;
    std::vector<Param> params;
    std::function<void(Run&)> run;
};

std::vector<Command> commands();

}  // namespace rlad::cli
