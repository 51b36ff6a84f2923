#pragma once

#include <map>
#include <string>

namespace lpg {

// Loads a template from the prompt directory (LPG_PROMPT_DIR at build time,
// overridable with the LPG_PROMPT_DIR environment variable). Results are
// cached per process.
const std::string& load_prompt(const std::string& name);

// Replaces every {{KEY}} placeholder; unknown placeholders are an error so
// template drift is caught early.
std::string render_template(const std::string& tpl,
                            const std::map<std::string, std::string>& vars);

}  // namespace lpg
