package org.example.debug.launch;

/**
 * Helpers for reading and writing launch configuration attributes.
 */
public final class LaunchConfigurationUtils {

    public static final String ATTR_PROGRAM_ARGUMENTS = "programArguments";
    public static final String ATTR_WORKING_DIRECTORY = "workingDirectory";
    public static final String ATTR_SOURCE_PATH_PROVIDER = "sourcePathProvider";

    private LaunchConfigurationUtils() {
    }

    public static String getProgramArguments(ILaunchConfiguration configuration) throws CoreException {
        return configuration.getAttribute(ATTR_PROGRAM_ARGUMENTS, "");
    }

    public static String getWorkingDirectory(ILaunchConfiguration configuration) throws CoreException {
        return configuration.getAttribute(ATTR_WORKING_DIRECTORY, (String) null);
    }

    public static ILaunchConfigurationWorkingCopy copyLaunchConfiguration(ILaunchConfiguration configuration) throws CoreException {
        return configuration.getWorkingCopy();
    }

    public static boolean isSharedLaunchConfiguration(ILaunchConfiguration configuration) {
        return !configuration.isLocal();
    }
}
