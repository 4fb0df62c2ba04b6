#include "jamflow/errors.hpp"

#include <cerrno>
#include <cstring>

namespace jamflow {

void throw_io(std::string const& what, std::string const& path) {
  auto msg = what + " '" + path + "'";
  if (errno != 0) {
    msg += ": ";
    msg += std::strerror(errno);
  }
  throw IoError{msg};
}

}  // namespace jamflow
