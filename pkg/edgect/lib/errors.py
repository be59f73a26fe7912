# Copyright (c) 2024, the edgect authors
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Exception hierarchy shared by the reconstruction modules.'''


class ReconError(Exception):
    '''Base class of edgect errors.'''


class InvalidArgumentError(ReconError, ValueError):
    '''A precondition on an argument was violated.'''


class NumericalFailureError(ReconError, ArithmeticError):
    '''An iterative method broke down or produced non-finite values.'''

    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f'{message} at iteration {iteration:,d}'
        super().__init__(message)
        self.iteration = iteration


class MatrixFileError(ReconError):
    '''A MatrixFile is malformed or truncated.'''
