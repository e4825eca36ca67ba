__author__ = "dpsurv developers"
__copyright__ = "Copyright 2024, dpsurv developers"
__credits__ = []
__license__ = ""
__version__ = "0.1.0"
__maintainer__ = "dpsurv developers"
__email__ = ""
__status__ = "Dev"
