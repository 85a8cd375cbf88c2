#include "sb/resonance.hpp"
namespace sb {
}
