#include "alphadisc/errors.hpp"

#include "detail/numeric.hpp"

namespace alphadisc::detail {

void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const IndefiniteCombinationError& e) {
    throw IndefiniteCombinationError(std::string(e.what()) + " " + context, e.eigenvalue());
  } catch (const RankDeficiencyError& e) {
    throw RankDeficiencyError(std::string(e.what()) + " " + context);
  } catch (const DomainError& e) {
    throw DomainError(std::string(e.what()) + " " + context);
  } catch (const NonFiniteError& e) {
    throw NonFiniteError(std::string(e.what()) + " " + context);
  } catch (const UnsupportedLimitError& e) {
    throw UnsupportedLimitError(std::string(e.what()) + " " + context);
  } catch (const BracketError& e) {
    throw BracketError(std::string(e.what()) + " " + context);
  }
}

}  // namespace alphadisc::detail
