#include "rbqa/plans.hpp"
