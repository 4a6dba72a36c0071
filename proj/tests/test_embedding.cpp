#include "doctest.h"

#include "w2v/embedding.hpp"
