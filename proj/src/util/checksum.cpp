#include "gridtraffic/util/checksum.hpp"

#include <cstdio>

namespace gridtraffic {

std::string Fnv1a64::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash_));
  return buf;
}

}  // namespace gridtraffic
