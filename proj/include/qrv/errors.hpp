#pragma once

#include <stdexcept>
#include <string>

namespace qrv {

// Base for all library errors; CLI maps subclasses onto exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };
struct DataError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };

// data_ingest
struct UnparseableRow : DataError { using DataError::DataError; };
struct EmptyFile : DataError { using DataError::DataError; };
struct NoValidDays : DataError { using DataError::DataError; };

// realized_measures
struct EmptyDay : DataError { using DataError::DataError; };
struct TooFewObservations : DataError { using DataError::DataError; };
struct DegenerateDay : DataError { using DataError::DataError; };

// qr_core
struct RankDeficientDesign : NumericError { using NumericError::NumericError; };
struct NonConvergence : NumericError { using NumericError::NumericError; };
struct DimensionMismatch : DataError { using DataError::DataError; };

// model_builder
struct SeriesTooShort : DataError { using DataError::DataError; };
struct IndexOutOfRange : DataError { using DataError::DataError; };
struct MissingImpliedVol : DataError { using DataError::DataError; };
struct InsufficientHistory : DataError { using DataError::DataError; };

// caviar
struct ExplosivePath : NumericError { using NumericError::NumericError; };
struct AllStartsFailed : NumericError { using NumericError::NumericError; };
struct NoStableRegion : NumericError { using NumericError::NumericError; };

// arfima_mixture
struct NonFiniteLikelihood : NumericError { using NumericError::NumericError; };
struct OptimizerDivergence : NumericError { using NumericError::NumericError; };
struct RootBracketFailure : NumericError { using NumericError::NumericError; };

// evaluation
struct LengthMismatch : DataError { using DataError::DataError; };
struct MultiStepRefused : DataError { using DataError::DataError; };
struct DegenerateVariance : NumericError { using NumericError::NumericError; };

// implied_vol
struct RootFailure : NumericError { using NumericError::NumericError; };
struct NoBracket : NumericError { using NumericError::NumericError; };
struct TooFewQuotes : DataError { using DataError::DataError; };
struct NoBracketingMaturities : DataError { using DataError::DataError; };

}  // namespace qrv
