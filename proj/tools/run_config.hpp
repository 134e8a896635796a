#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mwt::cli {

/// Flat key=value settings. Every key must be declared with a default before
/// it can be assigned; assigning an undeclared key throws ConfigError.
class RunConfig {
 public:
  struct Entry {
    std::string key;
    std::string value;
    std::string help;
    bool is_path = false;
  };

  void declare(const std::string& key, const std::string& fallback, const std::string& help);
  void declare_path(const std::string& key, const std::string& fallback, const std::string& help);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  /// "key=value" with optional whitespace around the '='.
  void assign(const std::string& setting);

  /// UTF-8 text, one key=value per line, '#' starts a comment.
  void load(std::istream& in, const std::string& origin);
  void load_file(const std::string& path);

  /// Replaces every non-empty path value by its absolute form.
  void resolve_paths();

  const std::string& str(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Every key in declaration order, suitable for load().
  void write(std::ostream& out) const;
  void write_file(const std::string& path) const;

 private:
  std::vector<Entry> entries_;
  Entry* find(const std::string& key);
  const Entry& at(const std::string& key) const;
};

}  // namespace mwt::cli
