#include "trustcp/errors.hpp"

#include <exception>

namespace trustcp {

void rethrow_with_stage(const std::string& stage) {
  try {
    throw;
  } catch (const ArgumentError& e) {
    throw ArgumentError(stage + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(stage + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(stage + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ArgumentError(stage + ": " + e.what());
  }
}

}  // namespace trustcp
