#include "lpg/prompts.hpp"

#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

#include "lpg/errors.hpp"

#ifndef LPG_PROMPT_DIR
#define LPG_PROMPT_DIR "prompts"
#endif

namespace lpg {

namespace {

std::string prompt_dir() {
  if (const char* v = std::getenv("LPG_PROMPT_DIR")) return v;
  return LPG_PROMPT_DIR;
}

}  // namespace

const std::string& load_prompt(const std::string& name) {
  static std::mutex mu;
  static std::map<std::string, std::string> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(name); it != cache.end()) return it->second;

  std::string path = prompt_dir() + "/" + name;
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open prompt template: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return cache.emplace(name, ss.str()).first->second;
}

std::string render_template(const std::string& tpl,
                            const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tpl.size());
  size_t pos = 0;
  while (pos < tpl.size()) {
    size_t open = tpl.find("{{", pos);
    if (open == std::string::npos) {
      out.append(tpl, pos, std::string::npos);
      break;
    }
    out.append(tpl, pos, open - pos);
    size_t close = tpl.find("}}", open);
    if (close == std::string::npos)
      throw ConfigError("unterminated placeholder in template");
    std::string key = tpl.substr(open + 2, close - open - 2);
    auto it = vars.find(key);
    if (it == vars.end()) throw ConfigError("unbound template placeholder: " + key);
    out += it->second;
    pos = close + 2;
  }
  return out;
}

}  // namespace lpg
