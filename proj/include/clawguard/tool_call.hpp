#pragma once

#include <map>
#include <string>

#include "clawguard/taint.hpp"

namespace clawguard {

struct ArgValue {
  std::string value;
  TaintLabel taint;
};

// One agent-initiated action. Every argument carries exactly one taint
// label; reasoning_excerpt may be empty but is always present.
struct ToolCallRequest {
  std::string tool;
  std::map<std::string, ArgValue> args;
  std::string reasoning_excerpt;
  std::string declared_purpose;
  std::string session_id;
};

}  // namespace clawguard
