// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace nestdyn {

enum class ErrorCode {
    invalid_shape,
    smoothing_overlap,
    convexity_violation,
    accuracy,
    domain,
    unbounded_ray,
    no_intersection,
    degenerate_geometry,
    hypothesis_violation,
    inversion,
    singular_parametrization,
    invalid_argument,
    config,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::invalid_shape: return "invalid-shape";
    case ErrorCode::smoothing_overlap: return "smoothing-overlap";
    case ErrorCode::convexity_violation: return "convexity-violation";
    case ErrorCode::accuracy: return "accuracy";
    case ErrorCode::domain: return "domain";
    case ErrorCode::unbounded_ray: return "unbounded-ray";
    case ErrorCode::no_intersection: return "no-intersection";
    case ErrorCode::degenerate_geometry: return "degenerate-geometry";
    case ErrorCode::hypothesis_violation: return "hypothesis-violation";
    case ErrorCode::inversion: return "inversion";
    case ErrorCode::singular_parametrization: return "singular-parametrization";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::config: return "config";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace nestdyn
