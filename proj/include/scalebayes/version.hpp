#ifndef SCALEBAYES_VERSION_HPP
#define SCALEBAYES_VERSION_HPP

namespace scalebayes {

inline constexpr const char* version_string = "scale-bayes 0.1.0";

}

#endif
