#include "doctest.h"

#include "w2v/evaluation.hpp"
