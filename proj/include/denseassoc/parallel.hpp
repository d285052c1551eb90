#pragma once

// Every data-parallel kernel takes an Exec tag. The serial variant is the
// reference implementation; the OpenMP variant must produce bit-identical
// output (tests compare them directly).

namespace denseassoc {

enum class Exec { serial, parallel };

}  // namespace denseassoc
