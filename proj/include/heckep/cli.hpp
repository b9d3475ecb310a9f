// placeholder until the survey/CLI layer lands
#pragma once

namespace heckep {
inline int cli_main(int, char**) { return 0; }
}  // namespace heckep
