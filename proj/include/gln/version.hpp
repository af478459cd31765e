#ifndef GLN_VERSION_HPP
#define GLN_VERSION_HPP

#define GLN_VERSION_MAJOR 0
#define GLN_VERSION_MINOR 1
#define GLN_VERSION_PATCH 0
#define GLN_VERSION_STRING "0.1.0"

namespace gln {

inline const char* version() { return GLN_VERSION_STRING; }

}  // namespace gln

#endif  // GLN_VERSION_HPP
