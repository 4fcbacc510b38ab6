#pragma once

#include <ostream>

#include <json.hpp>

#include "commands.hpp"
#include "nsp/error.hpp"

namespace nsp::cli {

// Runs body() and maps library exceptions to exit codes, message on err.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const DivergenceError& e) {
    err << "error: solver diverged at iteration " << e.iteration() << ": " << e.what() << '\n';
    return kDivergence;
  } catch (const CertificationError& e) {
    err << "error: " << e.what() << '\n';
    return kDivergence;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed input: " << e.what() << '\n';
    return kMalformedInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kMalformedInput;
  }
}

}  // namespace nsp::cli
