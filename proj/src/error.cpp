#include "rpf/error.hpp"

namespace rpf {

Error::Error(std::string module, ErrorKind kind, const std::string& message)
    : std::runtime_error("[" + module + "] " + message),
      module_(std::move(module)),
      kind_(kind) {}

}  // namespace rpf
