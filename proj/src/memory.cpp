#include "hod/memory.hpp"

namespace hod::mem {

Counters& thread_counters() {
    thread_local Counters c;
    return c;
}

}  // namespace hod::mem
