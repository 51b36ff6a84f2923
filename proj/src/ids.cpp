#include "lpg/ids.hpp"

#include <cctype>

#include "lpg/errors.hpp"

namespace lpg {

namespace {

bool valid_category(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::islower(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

}  // namespace

NodeId NodeId::parse(const std::string& text, bool allow_concatenated) {
  auto dash = text.rfind('-');
  if (dash != std::string::npos && dash > 0 && dash + 1 < text.size()) {
    std::string cat = text.substr(0, dash);
    std::string num = text.substr(dash + 1);
    bool all_digits = !num.empty();
    for (char c : num) all_digits = all_digits && std::isdigit(static_cast<unsigned char>(c));
    if (all_digits && valid_category(cat)) {
      int idx = std::stoi(num);
      if (idx < 1) throw IdError("node index must be >= 1: '" + text + "'");
      return NodeId(cat, idx);
    }
  }
  if (allow_concatenated) {
    // `water_glass1`: split at the last non-digit character.
    size_t pos = text.size();
    while (pos > 0 && std::isdigit(static_cast<unsigned char>(text[pos - 1]))) --pos;
    if (pos > 0 && pos < text.size()) {
      std::string cat = text.substr(0, pos);
      if (valid_category(cat)) {
        int idx = std::stoi(text.substr(pos));
        if (idx >= 1) return NodeId(cat, idx);
      }
    }
  }
  throw IdError("malformed node id: '" + text + "'");
}

}  // namespace lpg
