#include "qsync/error.hpp"

namespace qsync {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Truncation: return "truncation";
        case ErrorKind::Index: return "index";
        case ErrorKind::Divergence: return "divergence";
        case ErrorKind::Positivity: return "positivity";
        case ErrorKind::Aliasing: return "aliasing";
        case ErrorKind::Degenerate: return "degenerate";
        case ErrorKind::Cutoff: return "cutoff";
        case ErrorKind::NoCrossing: return "no_crossing";
        case ErrorKind::NoBracket: return "no_bracket";
        case ErrorKind::Inconclusive: return "inconclusive";
        case ErrorKind::NoSeparatrix: return "no_separatrix";
        case ErrorKind::InvalidConfig: return "invalid_config";
        case ErrorKind::Normalization: return "normalization";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

}  // namespace qsync
