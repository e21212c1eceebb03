#include <exception>
#include <ostream>

#include "qho/app/commands.hpp"
#include "qho/errors.hpp"

namespace qho::app {

int report_exception(std::ostream& err) {
    try {
        throw;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const GridTooSmall& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const GridTooCoarse& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const ResonanceError& e) {
        err << "resonance: " << e.what() << '\n';
        return kExitResonanceOrDomain;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return kExitResonanceOrDomain;
    } catch (const PrecisionError& e) {
        err << "domain error: " << e.what() << '\n';
        return kExitResonanceOrDomain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitOther;
    }
}

}  // namespace qho::app
