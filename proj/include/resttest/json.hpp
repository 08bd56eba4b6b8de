#pragma once

#include <json.hpp>  // vendored nlohmann/json

namespace resttest {

// Insertion-ordered JSON keeps document order for parsed specs and lets
// writers control key order explicitly.
using Json = nlohmann::ordered_json;

}  // namespace resttest
