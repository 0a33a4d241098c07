#include "csac/app/ini.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <sstream>

#include "csac/errors.hpp"

namespace csac::app {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

bool valid_name(std::string_view s) {
  return !s.empty() && std::ranges::all_of(s, [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
  });
}

}  // namespace

IniDocument IniDocument::parse(std::istream& in) {
  IniDocument doc;
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string text = trim(raw);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError("unterminated section header", line);
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      if (!valid_name(section)) throw ConfigError("invalid section name '" + section + "'", line);
      if (std::ranges::find(doc.sections_, section) == doc.sections_.end()) doc.sections_.push_back(section);
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    const std::string key = trim(std::string_view(text).substr(0, eq));
    std::string value = trim(std::string_view(text).substr(eq + 1));
    if (const auto hash = value.find(" #"); hash != std::string::npos) value = trim(value.substr(0, hash));
    if (!valid_name(key)) throw ConfigError("invalid key '" + key + "'", line);
    const std::string full = section.empty() ? key : section + "." + key;
    if (const auto it = doc.index_.find(full); it != doc.index_.end()) {
      throw ConfigError("duplicate key '" + full + "' (first set on line " +
                            std::to_string(doc.entries_[it->second].second.line) + ")",
                        line);
    }
    doc.index_.emplace(full, doc.entries_.size());
    doc.entries_.push_back({full, {value, line}});
  }
  if (in.bad()) throw ConfigError("read error");
  return doc;
}

IniDocument IniDocument::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

const IniDocument::Entry* IniDocument::find(const std::string& key) const {
  const auto it = index_.find(key);
  return it == index_.end() ? nullptr : &entries_[it->second].second;
}

}  // namespace csac::app
