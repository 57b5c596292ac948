from __future__ import (print_function, absolute_import, division, unicode_literals)

import inspect
from os.path import dirname, join

# Logging
from vistab import vimsgs
msgs = vimsgs.get_logger()

# Initialize the settings variable
argflag = None


def default_settings_file():
    """ Path of the settings file shipped with the package
    """
    return join(dirname(__file__), 'settings', 'settings.default')


class BaseFunctions(object):
    def __init__(self, defname=None, savname=None):
        """ Initialise a settings class.

        Parameters
        ----------
        defname : str, optional
          Name of the default settings file to load. If None, the shipped defaults are used.
        savname : str, optional
          Name of the file that should save the complete list of the loaded settings.
        """
        if defname is None:
            defname = default_settings_file()
        self._defname = defname
        self._savname = savname
        self._argflag = dict()

    def load_file(self, filename=None):
        """ Load a settings file

        Parameters
        ----------
        filename : str
          Name of the settings file to load. If None, the default settings will be loaded.

        Returns
        -------
        linesarr : list
          Each element of this list contains [key, value, line number]
        """
        if filename is None:
            msgs.info("Loading default settings")
        else:
            msgs.info("Loading settings")
        try:
            if filename is None:
                lines = open(self._defname, 'r').readlines()
            else:
                lines = open(filename, 'r').readlines()
        except IOError:
            if filename is None:
                msgs.error("Default settings file does not exist:" + msgs.newline() +
                           self._defname)
            else:
                msgs.error("Settings file does not exist:" + msgs.newline() +
                           filename)
        linesarr = self.load_lines(lines)
        return linesarr

    def load_lines(self, lines):
        """ Load the lines of a settings file.
        Ignore comment lines (those that start with a #) and
        split each remaining line into key and value.

        Parameters
        ----------
        lines : list
          A list containing all settings lines to be parsed.

        Returns
        -------
        linesarr : list
          Each element of this list contains [key, value, line number]
        """
        linesarr = []
        for ii, ll in enumerate(lines):
            ll = ll.replace("\t", " ").replace("\n", " ")
            if len(ll.strip()) == 0:
                # Nothing on a line
                continue
            elif ll.strip()[0] == '#':
                # A comment line
                continue
            # Remove comments
            ll = ll.split("#")[0].strip()
            if '=' not in ll:
                msgs.error("Line {0:d} is not of the form 'key = value':".format(ii+1) +
                           msgs.newline() + ll)
            key, value = ll.split("=", 1)
            key, value = key.strip(), value.strip()
            if len(key) == 0 or len(value) == 0:
                msgs.error("There appears to be a missing key or value on line {0:d}:".format(ii+1) +
                           msgs.newline() + ll)
            linesarr.append([key, value, ii+1])
        return linesarr

    def keys(self):
        """ The documented setting keys (one validating method per key)
        """
        base = set(dir(BaseFunctions))
        return sorted([x for x, y in inspect.getmembers(self, predicate=inspect.ismethod)
                       if x not in base and not x.startswith('_')])

    def save(self, savname=None):
        """ Save the settings used for a given run, in a form that can be re-loaded
        """
        if savname is None:
            savname = self._savname
        if savname is None:
            msgs.error("No file name was given to save the settings")
        keylst = ["{0:s} = {1:s}\n".format(key, format_value(self._argflag[key]))
                  for key in sorted(self._argflag.keys(), key=str.lower)]
        with open(savname, 'w') as afout:
            for line in keylst:
                afout.write(line)

    def set_param(self, lst, value=None):
        """ Save a single parameter to the argflag dictionary

        Parameters
        ----------
        lst : str
          Either a string of the form 'key = value', or the key alone, in which case
          value must be specified.
        value : str, optional
          The value of the keyword argument provided by lst
        """
        if value is None:
            lines = self.load_lines([lst])
            if len(lines) != 1:
                msgs.error("Couldn't read the keyword argument:" + msgs.newline() + lst)
            key, value = lines[0][0], lines[0][1]
        else:
            key, value = lst, "{0}".format(value)
        self.set_paramlist([[key, value, 0]])

    def set_paramlist(self, lstall):
        """ Save a list of parameters to the argflag dictionary

        Parameters
        ----------
        lstall : list
          Each element of lstall is [key, value, line number]
        """
        members = self.keys()
        for key, value, lineno in lstall:
            if key not in members:
                where = "" if lineno == 0 else " (line {0:d})".format(lineno)
                msgs.error("Unknown setting '{0:s}'{1:s}".format(key, where))
            getattr(self, key)(value)

    def update(self, v, ll=None):
        """ Update an element of the argflag dictionary

        Parameters
        ----------
        v : any type
          The value of a keyword argument
        ll : str (optional)
          The keyword. In general, ll is determined by traceback
          to the method that called update.
        """
        if ll is None:
            ll = inspect.currentframe().f_back.f_code.co_name
        self._argflag[ll] = v

    def check(self):
        """ Cross-key validation, run once every file has been loaded
        """
        af = self._argflag
        if af['data_source'] == 'csv':
            if af['data_train_file'] is None or af['data_test_file'] is None:
                msgs.error("'data_source = csv' requires both data_train_file and data_test_file")
        elif af['batch_size'] > af['n_train']:
            msgs.error("The argument of 'batch_size' must be <= n_train ({0:d})".format(af['n_train']))
        if af['init_sigma'] <= af['sigma0']:
            msgs.error("The argument of 'init_sigma' must be > sigma0 ({0:g})".format(af['sigma0']))
        if af['seeds'] is not None:
            if len(af['seeds']) != af['run_count']:
                msgs.error("'seeds' must list exactly run_count ({0:d}) seeds".format(af['run_count']))
            if len(set(af['seeds'])) != len(af['seeds']):
                msgs.error("The argument of 'seeds' must not repeat a seed")
        if len(af['compare_objectives']) != 2:
            msgs.error("The argument of 'compare_objectives' must list two objectives")

    def run_seeds(self):
        """ Seeds of the epsilon runs; derived from 'seed' unless listed explicitly
        """
        if self._argflag['seeds'] is not None:
            return list(self._argflag['seeds'])
        return [self._argflag['seed']*1000 + r for r in range(self._argflag['run_count'])]


class ExperimentSettings(BaseFunctions):
    """ One validating method per setting key; the method name is the key.
    """

    # Data
    def data_source(self, v):
        """ Where the data come from: synthetic blobs or two csv files
        """
        v = key_allowed(v, ['blobs', 'csv'])
        self.update(v)

    def data_train_file(self, v):
        v = key_none(v)
        self.update(v)

    def data_test_file(self, v):
        v = key_none(v)
        self.update(v)

    def n_train(self, v):
        v = key_int(v)
        key_min_val(v, 2)
        self.update(v)

    def n_test(self, v):
        v = key_int(v)
        key_min_val(v, 1)
        self.update(v)

    def classes(self, v):
        v = key_int(v)
        key_min_val(v, 2)
        self.update(v)

    def feature_dim(self, v):
        v = key_int(v)
        key_min_val(v, 1)
        self.update(v)

    def spread(self, v):
        """ Standard deviation of each blob around its centre
        """
        v = key_float(v)
        key_min_val(v, 0.0)
        self.update(v)

    def blob_radius(self, v):
        v = key_float(v)
        key_positive(v)
        self.update(v)

    def data_seed(self, v):
        v = key_int(v)
        key_min_val(v, 0)
        self.update(v)

    # Conditions
    def label_noise(self, v):
        """ Fractions of training labels to resample, one condition per entry
        """
        v = [float(x) for x in key_list(v)]
        for x in v:
            key_range(x, 0.0, 1.0)
        self.update(v)

    def augment(self, v):
        """ Augmentation switches, one condition per entry
        """
        v = key_list(v)
        for x in v:
            if not isinstance(x, bool):
                msgs.error("The argument of {0:s} must be a list of True/False".format(get_current_name()))
        self.update(v)

    def jitter_scale(self, v):
        v = key_float(v)
        key_min_val(v, 0.0)
        self.update(v)

    def flip_prob(self, v):
        v = key_float(v)
        key_range(v, 0.0, 1.0)
        self.update(v)

    # Model
    def hidden(self, v):
        """ Hidden layer widths of the MLP, e.g. [64, 64]; [] gives a linear model
        """
        v = key_list(v)
        for x in v:
            if not isinstance(x, int) or isinstance(x, bool) or x < 1:
                msgs.error("The argument of {0:s} must be a list of positive integers".format(get_current_name()))
        self.update(v)

    def activation(self, v):
        v = key_allowed(v, ['relu', 'tanh'])
        self.update(v)

    def bias(self, v):
        """ Include a bias vector in every layer of the MLP
        """
        v = key_bool(v)
        self.update(v)

    def sigma0(self, v):
        """ Floor on the posterior standard deviations
        """
        v = key_float(v)
        key_positive(v)
        self.update(v)

    def init_sigma(self, v):
        v = key_float(v)
        key_positive(v)
        self.update(v)

    def prior_std(self, v):
        v = key_float(v)
        key_positive(v)
        self.update(v)

    # Objective
    def objective(self, v):
        v = key_allowed(v, ['elbo', 'dlm'])
        self.update(v)

    def compare_objectives(self, v):
        v = key_list_allowed(v, ['elbo', 'dlm'])
        self.update(v)

    def compare_augment(self, v):
        v = key_bool(v)
        self.update(v)

    def compare_label_noise(self, v):
        v = key_float(v)
        key_range(v, 0.0, 1.0)
        self.update(v)

    def kl_coeff(self, v):
        """ Coefficient multiplying the KL term of the objective
        """
        v = key_float(v)
        key_min_val(v, 0.0)
        self.update(v)

    def mc_samples(self, v):
        v = key_int(v)
        key_min_val(v, 1)
        self.update(v)

    def mc_samples_dlm(self, v):
        v = key_int(v)
        key_min_val(v, 1)
        self.update(v)

    # Optimiser
    def lr(self, v):
        v = key_float(v)
        key_positive(v)
        self.update(v)

    def momentum(self, v):
        v = key_float(v)
        if v < 0.0 or v >= 1.0:
            msgs.error("The argument of {0:s} must be in [0, 1)".format(get_current_name()))
        self.update(v)

    def lr_decay(self, v):
        v = key_float(v)
        if v <= 0.0 or v > 1.0:
            msgs.error("The argument of {0:s} must be in (0, 1]".format(get_current_name()))
        self.update(v)

    def lr_decay_every(self, v):
        v = key_int(v)
        key_min_val(v, 1)
        self.update(v)

    def batch_size(self, v):
        v = key_int(v)
        key_min_val(v, 1)
        self.update(v)

    def epochs(self, v):
        v = key_int(v)
        key_min_val(v, 0)
        self.update(v)

    def schedule(self, v):
        v = key_allowed(v, ['step_decay', 'logT'])
        self.update(v)

    def logt_c(self, v):
        v = key_float(v)
        key_positive(v)
        self.update(v)

    def grad_clip(self, v):
        """ Per-example gradient norm clip; None disables clipping
        """
        v = key_none_float(v)
        if v is not None:
            key_positive(v)
        self.update(v)

    def snapshot_stride(self, v):
        v = key_int(v)
        key_min_val(v, 0)
        self.update(v)

    # Protocol
    def pair_count(self, v):
        v = key_int(v)
        key_min_val(v, 0)
        self.update(v)

    def run_count(self, v):
        v = key_int(v)
        key_min_val(v, 2)
        self.update(v)

    def eval_samples(self, v):
        v = key_int(v)
        key_min_val(v, 1)
        self.update(v)

    def seed(self, v):
        v = key_int(v)
        key_min_val(v, 0)
        self.update(v)

    def seeds(self, v):
        if v.lower() == 'none':
            v = None
        else:
            v = key_list(v)
            for x in v:
                if not isinstance(x, int) or isinstance(x, bool) or x < 0:
                    msgs.error("The argument of {0:s} must be a list of non-negative integers".format(get_current_name()))
        self.update(v)

    # Bounds
    def loss_bound(self, v):
        """ C, the bound on the loss used by the KL route
        """
        v = key_float(v)
        key_positive(v)
        self.update(v)

    def lipschitz(self, v):
        """ K, the Lipschitz constant of the loss; None reports the W2 route without K
        """
        v = key_none_float(v)
        if v is not None:
            key_positive(v)
        self.update(v)

    def delta(self, v):
        v = key_float(v)
        if v <= 0.0 or v >= 1.0:
            msgs.error("The argument of {0:s} must be in (0, 1)".format(get_current_name()))
        self.update(v)

    def union_b(self, v):
        v = key_int(v)
        key_min_val(v, 1)
        self.update(v)

    def union_c(self, v):
        v = key_float(v)
        key_positive(v)
        self.update(v)

    # Output
    def outdir(self, v):
        self.update(v)

    def expansion_file(self, v):
        v = key_none(v)
        self.update(v)

    def save_snapshots(self, v):
        v = key_bool(v)
        self.update(v)

    def verbosity(self, v):
        v = key_int(v)
        key_range(v, 0, 2)
        self.update(v)


def get_argflag_class(init=None):
    """ Load the default settings, then a user file and any extra lines

    Parameters
    ----------
    init : tuple, optional
      (config file or None, list of 'key = value' override lines or None)

    Returns
    -------
    argf : ExperimentSettings
    """
    cfgfile, overrides = (None, None) if init is None else init
    argf = ExperimentSettings()
    argf.set_paramlist(argf.load_file())
    if cfgfile is not None:
        argf.set_paramlist(argf.load_file(cfgfile))
    if overrides is not None:
        argf.set_paramlist(argf.load_lines(overrides))
    argf.check()
    return argf


def init(argf):
    """ Publish the resolved settings

    Parameters
    ----------
    argf : ExperimentSettings
    """
    global argflag
    argflag = argf._argflag.copy()
    argflag['seeds'] = argf.run_seeds()
    return argflag


def format_value(v):
    """ Inverse of the key_* parsers, used when saving settings
    """
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join([format_value(x) for x in v]) + "]"
    if isinstance(v, float):
        return repr(v)
    return "{0}".format(v)


def get_current_name(depth=1):
    """ Return the name of the setting key that called this function

    Parameters
    ----------
    depth : int, optional
      Number of frames between the setting method and this call
    """
    frame = inspect.currentframe()
    for ii in range(depth):
        frame = frame.f_back
    return "'" + frame.f_code.co_name + "'"


def key_allowed(v, allowed):
    """ Check that a keyword argument is in an allowed list of parameters.

    Parameters
    ----------
    v : str
      value of a keyword argument
    allowed : list
      list of allowed values that v can take

    Returns
    -------
    v : str
      A value used by the settings dictionary
    """
    ll = inspect.currentframe().f_back.f_code.co_name
    func_name = "'" + ll + "'"
    for i in allowed:
        if v.lower() == i.lower():
            return i
    msgs.error("The argument of {0:s} must be one of".format(func_name) + msgs.newline() +
               ", ".join(allowed))


def key_bool(v):
    """ Check that a keyword argument is a boolean variable.

    Parameters
    ----------
    v : str
      value of a keyword argument

    Returns
    -------
    v : bool
      A value used by the settings dictionary
    """
    ll = inspect.currentframe().f_back.f_code.co_name
    func_name = "'" + ll + "'"
    if v.lower() == "true":
        v = True
    elif v.lower() == "false":
        v = False
    else:
        msgs.error("The argument of {0:s} can only be 'True' or 'False'".format(func_name))
    return v


def key_float(v):
    """ Check that a keyword argument is a float.

    Parameters
    ----------
    v : str
      value of a keyword argument

    Returns
    -------
    v : float
      A value used by the settings dictionary
    """
    ll = inspect.currentframe().f_back.f_code.co_name
    func_name = "'" + ll + "'"
    try:
        v = float(v)
    except ValueError:
        msgs.error("The argument of {0:s} must be of type float".format(func_name))
    return v


def key_int(v):
    """ Check that a keyword argument is an int.

    Parameters
    ----------
    v : str
      value of a keyword argument

    Returns
    -------
    v : int
      A value used by the settings dictionary
    """
    ll = inspect.currentframe().f_back.f_code.co_name
    func_name = "'" + ll + "'"
    try:
        v = int(v)
    except ValueError:
        msgs.error("The argument of {0:s} must be of type int".format(func_name))
    return v


def key_list(strlist):
    """ Check that a keyword argument is a list. Set the
    appropriate type of the list based on the supplied values.

    Parameters
    ----------
    strlist : str
      value of a keyword argument

    Returns
    -------
    v : list
      A value used by the settings dictionary
    """
    # Check if the input array is a null list
    if strlist.replace(" ", "") in ["[]", "()"]:
        return []
    # Remove outer brackets and split by commas
    temp = strlist.strip().lstrip('([').rstrip(')]').split(',')
    addarr = []
    # Find the type of the array elements
    for i in temp:
        i = i.strip()
        if i.lower() == 'none':
            # None type
            addarr += [None]
        elif i.lower() == 'true' or i.lower() == 'false':
            # bool type
            addarr += [i.lower() in ['true']]
        elif '.' in i or 'e' in i.lower():
            try:
                # Might be a float
                addarr += [float(i)]
            except ValueError:
                # Must be a string
                addarr += [i]
        else:
            try:
                # Could be an integer
                addarr += [int(i)]
            except ValueError:
                # Must be a string
                addarr += [i]
    return addarr


def key_list_allowed(v, allowed):
    """ Check that a keyword argument is a list, and that each
    value in the list is also in the supplied 'allowed' list.

    Parameters
    ----------
    v : str
      value of a keyword argument
    allowed : list
      list of allowed values that v can take

    Returns
    -------
    v : list
      A value used by the settings dictionary
    """
    ll = inspect.currentframe().f_back.f_code.co_name
    func_name = "'" + ll + "'"
    v = key_list(v)
    for ll in v:
        if ll not in allowed:
            msgs.error("The allowed list does not include: {0}".format(ll) + msgs.newline() +
                       "Please choose one of the following:" + msgs.newline() +
                       ", ".join(allowed) + msgs.newline() +
                       "for the argument of {0:s}".format(func_name))
    return v


def key_none(v):
    """ Check if a keyword argument is set to None.

    Parameters
    ----------
    v : str
      value of a keyword argument

    Returns
    -------
    v : None, str
      A value used by the settings dictionary
    """
    if v.lower() == "none":
        v = None
    return v


def key_none_float(v):
    """ Check if a keyword argument is set to None. If not,
    check that it is a float.
    """
    ll = inspect.currentframe().f_back.f_code.co_name
    func_name = "'" + ll + "'"
    if v.lower() == "none":
        return None
    try:
        v = float(v)
    except ValueError:
        msgs.error("The argument of {0:s} must be None or of type float".format(func_name))
    return v


def key_min_val(v, vmin):
    """ Check that the value is at least vmin
    Returns
    -------
    bool

    """
    if v < vmin:
        msgs.error("The argument of {0:s} must be >= {1}".format(get_current_name(2), vmin))
    return True


def key_positive(v):
    """ Check that the value is strictly positive
    """
    if v <= 0:
        msgs.error("The argument of {0:s} must be > 0".format(get_current_name(2)))
    return True


def key_range(v, vmin, vmax):
    """ Check that vmin <= v <= vmax
    """
    if v < vmin or v > vmax:
        msgs.error("The argument of {0:s} must be in [{1}, {2}]".format(get_current_name(2), vmin, vmax))
    return True
