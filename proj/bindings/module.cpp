#include <pybind11/pybind11.h>

namespace py = pybind11;

PYBIND11_MODULE(_qca1d, m) {
  m.doc() = "1D quantum cellular automaton toolkit";
  m.attr("__version__") = "0.1.0";
}
