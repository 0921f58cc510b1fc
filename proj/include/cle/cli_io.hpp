#pragma once

// Command-line plumbing: run records and suite reports as JSON, histogram
// CSV files, the `key = value` config format, and the command dispatcher
// behind tools/cle_cli.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cle/errors.hpp"
#include "cle/levy.hpp"

namespace cle::cli {

inline constexpr const char* kToolVersion = "1.0.0";

// Bad command line or config file; the CLI maps it to exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "UsageError"; }
};

struct RunRecord {
    std::string command;
    std::map<std::string, std::string> params;  // full echo, defaults included
    std::optional<double> value;
    std::map<std::string, double> values;  // extra named numbers
    std::optional<double> std_error;
    std::optional<std::uint64_t> n;
    std::optional<std::uint64_t> seed;
    std::map<std::string, std::string> outputs;  // files written beside the record
    std::optional<std::string> error_kind;
    std::optional<std::string> error_message;
    std::int64_t runtime_ms = 0;
    std::string tool_version = kToolVersion;

    bool operator==(const RunRecord&) const = default;
};

// JSON text; non-finite numbers become the strings "inf", "-inf", "nan".
// Keys come out in a fixed order so equal records give equal bytes.
std::string to_json(const RunRecord& r);
RunRecord run_record_from_json(const std::string& text);

struct Check {
    std::string name;
    double target = 0.0;
    double observed = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;  // error kind when the check threw

    bool operator==(const Check&) const = default;
};

struct SuiteReport {
    std::string suite;
    std::vector<Check> checks;
    std::int64_t runtime_ms = 0;
    std::string tool_version = kToolVersion;

    bool overall() const;
    bool operator==(const SuiteReport&) const = default;
};

std::string to_json(const SuiteReport& r);
SuiteReport suite_report_from_json(const std::string& text);

// Deterministic identity suites: "identities", "shifts", "factorization" or
// "all". A positive `tol_override` replaces every check's tolerance (and
// tightens the quadrature with it); failures and solver errors become failed
// checks, never exceptions.
SuiteReport run_suite(const std::string& selector, double tol_override = 0.0);
std::vector<std::string> suite_names();

struct HistogramTable {
    std::vector<double> bin_lo, bin_hi, mass, target;

    bool operator==(const HistogramTable&) const = default;
};

// mass = weighted mass per bin (sums to total_weight); target = the
// marked-jump density integrated over the bin.
HistogramTable marked_jump_table(const levy::WeightedJumpHistogram& h, double a, double beta);
// CSV with header `bin_lo,bin_hi,mass,target`, numbers printed round-trip exact.
void write_histogram_csv(const HistogramTable& t, const std::string& path);
HistogramTable read_histogram_csv(const std::string& path);

struct ConfigEntry {
    std::string value;
    int line = 0;
};
using ConfigMap = std::map<std::string, ConfigEntry>;

// `key = value` lines, `#` starts a comment, blank lines ignored. Throws
// UsageError with the line number on malformed lines, on a key outside
// `allowed` (unless empty), and on a repeated key (naming both lines).
ConfigMap load_config(const std::string& path, const std::set<std::string>& allowed = {});
ConfigMap parse_config(std::istream& in, const std::string& origin, const std::set<std::string>& allowed = {});

// Full CLI. Records and reports go to `out`, diagnostics to `err`.
// Exit codes: 0 success, 1 computation or verification failure, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cle::cli
