#pragma once

#define KSCAL_VERSION_MAJOR 0
#define KSCAL_VERSION_MINOR 1
#define KSCAL_VERSION_PATCH 0
#define KSCAL_VERSION_STRING "0.1.0"

namespace kscal {

inline const char* version() { return KSCAL_VERSION_STRING; }

}  // namespace kscal
