#pragma once

#include <stdexcept>
#include <string>

namespace saom {

/// Base class for all errors raised by the library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent run configuration / model specification.
struct config_error : error {
    using error::error;
};

/// Invalid or inconsistent data (panels, covariates, flow files, ...).
struct data_error : error {
    using error::error;
};

/// Estimation did not converge, or an operation requires a converged fit.
struct convergence_error : error {
    using error::error;
};

}  // namespace saom
