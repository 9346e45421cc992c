#pragma once
#include "rbqa/schema.hpp"
