#pragma once

#include <stdexcept>
#include <string>

namespace sqdf {

enum class Errc {
    invalid_argument,
    evaluation_at_pole,
    no_unique_steady_state,
    division_by_zero,
    numerical_failure,
    simulation_fault,
    divergence_fault,
    insufficient_data,
    invalid_bracket,
    config_error,
};

const char* to_string(Errc code) noexcept;

/// Exception carrying a machine-readable category alongside the message.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace sqdf
