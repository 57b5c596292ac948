from __future__ import absolute_import, division, print_function

import sys
from inspect import currentframe, getouterframes

vistab_logger = None

# ANSI codes of the message prefixes
_colours = dict(info='1;32m', warn='1;31m', error='1;37;41m', bug='1;37;40m', test='1;37;44m',
                work='1;30m', progress='1;33m', debug='1;34m', header='1;37;42m')
_prefixes = dict(info="[INFO]    ::", warn="[WARNING] ::", error="[ERROR]   ::", bug="[BUG]     ::",
                 test="[TEST]    ::", work="[WORK IN ]::", progress="[PROGRESS]::")
_indent = "             "


class VistabError(RuntimeError):
    """ Raised by Messages.error once the message has been printed and logged
    """
    pass


class Messages:
    """
    Create coloured text for messages printed to stderr.

    For further details on colours see the following example:
    http://ascii-table.com/ansi-escape-sequences.php
    """

    def __init__(self, log, debug, verbosity, colors=True):
        """
        Initialize the Message logging class

        Parameters
        ----------
        log : str or None
          Name of saved log file (no log will be saved if log is None)
        debug : dict
          dict used for debugging.
          'develop', 'train', 'deltas', 'expansion'
        verbosity : int (0,1,2)
          Level of verbosity:
            0 = No output
            1 = Minimal output (default - suitable for the average user)
            2 = All output, including test messages
        colors : bool
          If true, the screen output will have colors, otherwise
          normal screen output will be displayed
        """
        from vistab import viutils
        version, last_updated = viutils.get_version()
        import scipy
        import numpy
        import astropy

        self._log = None if log is None else open(log, 'w')
        self._debug = debug
        self._last_updated = last_updated
        self._version = version
        self._verbosity = verbosity
        self._colors = colors
        if self._log:
            rule = "-"*54 + "\n\n"
            self._log.write(rule)
            self._log.write("VISTAB was last updated {0:s}\n".format(last_updated))
            self._log.write("This log was generated with version {0:s} of VISTAB\n\n".format(version))
            for pckg in [scipy, numpy, astropy]:
                self._log.write("You are using {0:s} version={1:s}\n".format(pckg.__name__, pckg.__version__))
            self._log.write("\n" + rule)

    def _paint(self, kind, text):
        if not self._colors:
            return text
        return "\x1B[" + _colours[kind] + text + "\x1B[0m"

    def _emit(self, prefix, msg, show):
        """ Print to stderr when show is set; always copy to the log file
        """
        plain = prefix + self.debugmessage(plain=True) + msg
        if show:
            print(prefix + self.debugmessage() + msg, file=sys.stderr)
        if self._log:
            self._log.write(self.cleancolors(plain) + "\n")

    def _prefix(self, kind):
        return self._paint(kind, _prefixes[kind]) + " "

    def vistabheader(self, prognm):
        """
        Get the info header for VISTAB
        """
        header = "##  " + self._paint('header', "VISTAB : Stability bounds for variational inference "
                                                "v{0:s}".format(self._version)) + "\n"
        header += "##  Usage : {0:s} <command> [options]".format(prognm)
        return header

    def usage(self, prognm):
        descs = self.vistabheader(prognm)
        descs += "\n##  Available commands include:"
        descs += "\n##   expansion, bound, compare, pacbayes, counterexamples"
        descs += "\n##  Last updated: {0:s}".format(self._last_updated)
        return descs

    def debugmessage(self, plain=False):
        """ File, line and function of the caller in develop mode
        """
        if not self._debug['develop']:
            return ""
        # Skip this method, _emit and the public message method
        info = getouterframes(currentframe())[3]
        where = info[1].split("/")[-1] + " " + str(info[2]) + " " + info[3] + "()"
        return (where if plain else self._paint('debug', where)) + " - "

    def close(self):
        """
        Close the log file before the code exits
        """
        if self._log:
            self._log.close()
            self._log = None

    def signal_handler(self, signalnum, handler):
        """
        Handle signals sent by the keyboard during code execution
        """
        if signalnum == 2:
            self.info("Ctrl+C was pressed. Ending processes...")
            self.close()
            sys.exit()

    def error(self, msg, usage=False):
        """
        Print an error message and raise VistabError
        """
        self._emit("\n" + self._prefix('error'), msg, self._verbosity > 0)
        self.close()
        if usage:
            print(self.usage('run_vistab'), file=sys.stderr)
        raise VistabError(msg)

    def info(self, msg):
        self._emit(self._prefix('info'), msg, self._verbosity > 0)

    def test(self, msg):
        if self._verbosity == 2:
            self._emit(self._prefix('test'), msg, True)

    def warn(self, msg):
        self._emit(self._prefix('warn'), msg, self._verbosity > 0)

    def bug(self, msg):
        """
        Print a bug message, whatever the verbosity
        """
        self._emit(self._prefix('bug'), msg, True)

    def work(self, msg):
        """
        Print a work in progress message (develop mode only)
        """
        if self._debug['develop']:
            self._emit(self._prefix('work') + "\n" + self._prefix('progress'), msg, True)

    def prindent(self, msg):
        self._emit(_indent, msg, self._verbosity > 0)

    @staticmethod
    def newline():
        """
        Return a text string containing a newline to be used with messages
        """
        return "\n" + _indent

    @staticmethod
    def indent():
        return _indent

    def cleancolors(self, msg):
        """ Strip the ANSI colour codes from a message
        """
        for code in list(_colours.values()) + ["0m"]:
            msg = msg.replace("\x1B[" + code, "")
        return msg


def get_logger(init=None):
    """ Logger
    Parameters
    ----------
    init : tuple
      For instantiation
      (log, debug, verbosity)

    Returns
    -------
    msgs : Messages
    """
    global vistab_logger

    # Modules hold a reference taken at import, so re-initialise in place
    if init is not None:
        if vistab_logger is None:
            vistab_logger = Messages(init[0], init[1], init[2])
        else:
            vistab_logger.close()
            vistab_logger.__init__(init[0], init[1], init[2])
    elif vistab_logger is None:
        from vistab import videbug
        vistab_logger = Messages(None, videbug.init(), 1)

    return vistab_logger
