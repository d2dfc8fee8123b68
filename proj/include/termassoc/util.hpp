#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace termassoc {

// Base for every recoverable error the library reports to callers.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration: rule files, group schemes, synthetic specs, CLI options.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage was invoked on data a previous stage should have produced.
class OrderingError : public Error {
 public:
  using Error::Error;
};

// Input could not be read at all (as opposed to a malformed record).
class IoError : public Error {
 public:
  using Error::Error;
};

// A per-line problem found while reading JSON-lines input.
struct Diagnostic {
  enum class Severity { warning, error };
  std::size_t line = 0;  // 1-based; 0 when not tied to a line
  Severity severity = Severity::error;
  std::string message;
};

namespace utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes the scalar value at text[pos] and advances pos. Ill-formed
// sequences decode to U+FFFD and consume one byte.
char32_t decode_next(std::string_view text, std::size_t& pos);
void append(std::string& out, char32_t cp);

// Number of Unicode scalar values.
std::size_t length(std::string_view text);

// Approximate Unicode classes; no ICU. Latin, Greek and Cyrillic are handled
// precisely, other scripts are treated as letters outside the punctuation
// and symbol blocks.
bool is_alnum(char32_t cp);
bool is_space(char32_t cp);
char32_t to_lower(char32_t cp);
inline bool is_upper(char32_t cp) { return to_lower(cp) != cp; }

std::string lowercase(std::string_view text);

}  // namespace utf8

std::string trim(std::string_view text);

// Collapses every whitespace run (Unicode spaces included) to one ASCII
// space and trims both ends.
std::string collapse_whitespace(std::string_view text);

// Removes every whitespace character.
std::string strip_whitespace(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// RFC 4180 quoting, only when needed.
std::string csv_field(std::string_view value);
std::vector<std::string> parse_csv_line(std::string_view line);

// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t splitmix64(std::uint64_t x);
std::string hex64(std::uint64_t value);

// Runs body(i) for i in [0, n) on up to `threads` workers. The exception
// thrown for the lowest index is rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& body);

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

// Level comes from TERMASSOC_LOG (error|warn|info|debug), default warn.
LogLevel log_level();
void set_log_level(LogLevel level);
void log(LogLevel level, std::string_view message);

}  // namespace termassoc
