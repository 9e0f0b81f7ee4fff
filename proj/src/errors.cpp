#include "geocohort/errors.hpp"

namespace geocohort {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedRecord: return "malformed_record";
    case ErrorKind::MalformedGazetteerRow: return "malformed_gazetteer_row";
    case ErrorKind::MissingPretags: return "missing_pretags";
    case ErrorKind::SchemaMismatch: return "schema_mismatch";
    case ErrorKind::TooFewRows: return "too_few_rows";
    case ErrorKind::InvalidLabel: return "invalid_label";
    case ErrorKind::SingleClass: return "single_class";
    case ErrorKind::AuthorMismatch: return "author_mismatch";
    case ErrorKind::EmptyInput: return "empty_input";
    case ErrorKind::MissingPopulation: return "missing_population";
    case ErrorKind::MissingState: return "missing_state";
    case ErrorKind::EmptySeries: return "empty_series";
    case ErrorKind::RankDeficient: return "rank_deficient";
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::ConfigInvalid: return "config_invalid";
    case ErrorKind::MissingInput: return "missing_input";
  }
  return "unknown";
}

}  // namespace geocohort
