#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace csac::app {

/// Flat INI document: `[section]` headers, `key = value` lines, `#` or `;`
/// comments. Keys are addressed as "section.key"; lines before any header
/// belong to the empty section. Errors carry the 1-based line number.
class IniDocument {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static IniDocument parse(std::istream& in);
  static IniDocument parse_string(const std::string& text);

  const Entry* find(const std::string& key) const;
  bool contains(const std::string& key) const { return find(key) != nullptr; }
  /// Keys in file order.
  const std::vector<std::pair<std::string, Entry>>& entries() const noexcept { return entries_; }
  /// Section names in order of first appearance.
  const std::vector<std::string>& sections() const noexcept { return sections_; }

 private:
  std::vector<std::pair<std::string, Entry>> entries_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> sections_;
};

}  // namespace csac::app
