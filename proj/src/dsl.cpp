#include "rbqa/dsl.hpp"
