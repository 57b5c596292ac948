#!/usr/bin/env python
#
# -*- coding: utf-8 -*-


"""
This script runs the VISTAB experiments
"""
from __future__ import (print_function, absolute_import, division,
                        unicode_literals)

# Globals
from vistab import videbug
debug = videbug.init()
#debug['develop'] = True
#debug['expansion'] = True

from vistab.vimsgs import Messages as Initmsg
initmsgs = Initmsg(None, debug, 1)


def parser(options=None):
    import argparse
    from vistab import viexperiment

    parser = argparse.ArgumentParser(description=initmsgs.usage('run_vistab'),
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("command", type=str, choices=viexperiment.commands, help="Experiment to run")
    parser.add_argument("--config", type=str, default=None, help="Settings file ('key = value' lines)")
    parser.add_argument("--out", type=str, default=None, help="Output directory (overrides 'outdir')")
    parser.add_argument("--seed", type=int, default=None, help="Master seed (overrides 'seed')")
    parser.add_argument("--format", type=str, default='text', choices=['text', 'yaml'],
                        help="(text) Format of the summary printed to stdout")
    parser.add_argument("--log", type=str, default=None, help="Also write the messages to this file")
    parser.add_argument("-v", "--verbosity", type=int, default=None,
                        help="Level of verbosity (0-2); overrides 'verbosity'")
    parser.add_argument("-d", "--develop", default=False, action='store_true', help="Turn develop debugging on")
    parser.add_argument("--debug_expansion", default=False, action='store_true',
                        help="Report the largest expansion rate of every run")

    if options is None:
        pargs = parser.parse_args()
    else:
        pargs = parser.parse_args(options)
    return pargs


def main(args):
    """ Run one command

    Returns
    -------
    docs : list
      The summary documents printed to stdout
    """
    import os
    from signal import SIGINT, signal as sigsignal
    from vistab import vimsgs
    from vistab import vicheck
    from vistab import viparse
    from vistab import viexperiment
    from vistab import visave

    debug['develop'] = debug['develop'] or args.develop
    debug['expansion'] = debug['expansion'] or args.debug_expansion
    verbosity = 1 if args.verbosity is None else args.verbosity
    msgs = vimsgs.get_logger((args.log, debug, verbosity))
    # Send keyboard interrupts to the logger so the log file is closed
    sigsignal(SIGINT, msgs.signal_handler)
    try:
        vicheck.version_check()
    except vicheck.VersionError as err:
        msgs.error(str(err))

    # Settings: defaults, then the file, then the command line
    overrides = []
    if args.out is not None:
        overrides.append("outdir = {0:s}".format(args.out))
    if args.seed is not None:
        overrides.append("seed = {0:d}".format(args.seed))
    argf = viparse.get_argflag_class((args.config, overrides))
    argflag = viparse.init(argf)
    if args.verbosity is None and argflag['verbosity'] != verbosity:
        msgs._verbosity = argflag['verbosity']
    visave.make_outdir(argflag['outdir'])
    argf.save(os.path.join(argflag['outdir'], 'settings.used'))

    if args.command == 'expansion':
        profiles = viexperiment.cmd_expansion(argflag)
        docs = []
        for label in sorted(profiles.keys()):
            doc = viexperiment.expansion_summary(profiles[label], 'twin_runs')
            doc['label'] = label
            docs.append(doc)
    elif args.command == 'bound':
        docs = viexperiment.cmd_bound(argflag)
    elif args.command == 'compare':
        docs = viexperiment.cmd_compare(argflag)
    elif args.command == 'pacbayes':
        docs = viexperiment.cmd_pacbayes(argflag)
    else:
        docs = viexperiment.cmd_counterexamples()
        visave.save_yaml(os.path.join(argflag['outdir'], 'counterexamples.yaml'), docs)

    if args.format == 'yaml':
        print(visave.dump_yaml(docs), end='')
    else:
        print(viexperiment.format_text(docs), end='')
    msgs.close()
    return docs


def run(args):
    """ Execute main, converting failures into exit codes

    Returns
    -------
    status : int
      0 on success, 1 for a reported error, 2 for a bug
    """
    import sys
    import traceback
    from vistab import vimsgs

    if args.develop:
        main(args)
        return 0
    try:
        main(args)
    except vimsgs.VistabError:
        # Already reported by msgs.error
        return 1
    except Exception:
        # There is a bug in the code, print the file and line number of the error.
        et, ev, tb = sys.exc_info()
        filename, line_no = "<filename>", "<line_no>"
        while tb:
            co = tb.tb_frame.f_code
            filename = str(co.co_filename)
            line_no = str(traceback.tb_lineno(tb))
            tb = tb.tb_next
        filename = filename.split('/')[-1]
        initmsgs.bug("There appears to be a bug on Line " + line_no + " of " + filename + " with error:" +
                     initmsgs.newline() + str(ev))
        vimsgs.get_logger().close()
        return 2
    return 0


def entry():
    import sys
    sys.exit(run(parser()))


if __name__ == '__main__':
    entry()
